#include <algorithm>
#include <cmath>
#include <numbers>

#include "ollie/transcription.hpp"

namespace ollie {

std::vector<double> initial_guess(const ProblemSpec& spec, const GuessOptions& options) {
  spec.validate();
  const SystemParams& p = spec.params;
  const PhaseSchedule& sched = spec.schedule;
  const int T = sched.T;
  const int k = sched.kickoff_index();
  const int mid = sched.midpoint();
  const double phi_kick = kickoff_angle(p);
  const int s2 = sched.section_begin(2);
  const int s4 = sched.section_begin(4);
  const int s4_end = sched.section_end(4);
  const int n2 = sched.section_size(2);
  const int n4 = sched.section_size(4);

  Trajectory traj;
  traj.states.resize(T + 1);
  traj.controls.assign(T + 1, ControlSample{});
  traj.forces.resize(T + 1);
  const double h = std::clamp(options.suggested_duration / T, spec.h_min, spec.h_max);
  traj.durations.assign(T, h);

  // Pitch: ramps up to the strike angle across section 2, swings through
  // level in flight to the mirrored angle, and levels out across section 4.
  std::vector<double> phi(T + 1, 0.0);
  for (int i = s2; i <= k; ++i) phi[i] = phi_kick * (i - s2 + 1) / n2;
  for (int i = s4; i < s4_end; ++i) phi[i] = -phi_kick * (s4_end - i) / n4;
  for (int i = k + 1; i < s4; ++i) {
    const double u = static_cast<double>(i - k) / (s4 - k);
    phi[i] = phi_kick + u * (phi[s4] - phi_kick);
  }

  std::vector<double> y(T + 1, p.d);
  for (int i = s2; i <= k; ++i) y[i] = rear_pivot_height_unchecked(p, phi[i]);
  for (int i = s4; i < s4_end; ++i) y[i] = front_pivot_height_unchecked(p, phi[i]);
  // Flight: two half-parabolas meeting at the required apex at T/2.
  const double apex = spec.jump_height;
  for (int i = k + 1; i < s4; ++i) {
    if (i <= mid) {
      const double u = static_cast<double>(mid - i) / (mid - k);
      y[i] = apex - (apex - y[k]) * u * u;
    } else {
      const double u = static_cast<double>(i - mid) / (s4 - mid);
      y[i] = apex - (apex - y[s4]) * u * u;
    }
  }

  // Velocities and accelerations consistent with the Euler defects.
  auto differentiate = [&](const std::vector<double>& q, std::vector<double>& qd,
                           std::vector<double>& qdd) {
    qd.assign(T + 1, 0.0);
    qdd.assign(T + 1, 0.0);
    for (int i = 0; i < T; ++i) qd[i + 1] = (q[i + 1] - q[i]) / h;
    for (int i = 0; i < T; ++i) qdd[i] = (qd[i + 1] - qd[i]) / h;
  };
  std::vector<double> yd, ydd, phid, phidd;
  differentiate(y, yd, ydd);
  differentiate(phi, phid, phidd);

  const double weight = p.total_mass() * p.g;
  const ReactionForces balanced = static_equilibrium_forces(p);
  for (int i = 0; i <= T; ++i) {
    BoardState& s = traj.states[i];
    s.y = y[i];
    s.phi = phi[i];
    s.ydot = yd[i];
    s.phidot = phid[i];
    s.yddot = ydd[i];
    s.phiddot = phidd[i];
    switch (sched.section_of(i)) {
      case 1:
      case 5: traj.forces[i] = balanced; break;
      case 2: traj.forces[i] = {0.0, weight}; break;
      case 3: traj.forces[i] = {0.0, 0.0}; break;
      default: traj.forces[i] = {weight, 0.0}; break;
    }
  }
  traj.update_time();
  DecisionLayout layout{T};
  return encode(layout, traj);
}

}  // namespace ollie
