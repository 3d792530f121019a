#include "ollie/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "ollie/errors.hpp"

namespace ollie {

namespace {

struct Checker {
  double tol;
  std::vector<Violation>& out;

  void report(const char* name, int index, double magnitude) {
    if (!std::isfinite(magnitude)) magnitude = std::numeric_limits<double>::infinity();
    if (magnitude > tol) out.push_back({index, name, magnitude});
  }
  void equal(const char* name, int index, double lhs, double rhs) {
    report(name, index, std::abs(lhs - rhs));
  }
  void at_least(const char* name, int index, double value, double floor) {
    report(name, index, std::max(0.0, floor - value));
  }
  void within(const char* name, int index, double value, double lo, double hi) {
    report(name, index, std::max({0.0, lo - value, value - hi}));
  }
};

}  // namespace

VerificationReport verify_trajectory(const ProblemSpec& spec, const Trajectory& traj, double tol) {
  const PhaseSchedule& sched = spec.schedule;
  const int T = sched.T;
  const std::size_t n = static_cast<std::size_t>(T) + 1;
  if (traj.states.size() != n || traj.controls.size() != n || traj.forces.size() != n ||
      traj.durations.size() != static_cast<std::size_t>(T)) {
    std::ostringstream os;
    os << "trajectory has " << traj.states.size() << " states and " << traj.durations.size()
       << " durations, schedule expects " << n << " and " << T;
    throw StructuralError(os.str());
  }

  const SystemParams& p = spec.params;
  const double M = p.m_r + p.m_b;
  const double span = p.L + 2.0 * p.w;
  const double J = p.m_b * span * span / 12.0 + 0.5 * p.m_r * p.H * p.H;
  const double pi = std::numbers::pi;
  // Last index of the back-wheel section and the first airborne one.
  const int last_rear = sched.start[2] - 1;
  const int mid = T / 2;

  VerificationReport report;
  Checker check{tol, report.violations};

  for (int i = 0; i <= T; ++i) {
    const BoardState& s = traj.states[i];
    const ControlSample& c = traj.controls[i];
    const ReactionForces& f = traj.forces[i];
    const double a = c.theta - s.phi;
    const double da = c.theta_dot - s.phidot;
    const double dda = c.theta_ddot - s.phiddot;
    const double ex = M * s.xddot + p.m_b * p.H * (dda * std::sin(a) + da * da * std::cos(a));
    const double ey = M * s.yddot - f.R1 - f.R2 + M * p.g -
                      p.m_b * p.H * (da * da * std::sin(a) - dda * std::cos(a));
    const double ephi = J * s.phiddot - 0.5 * p.L * (f.R1 - f.R2) -
                        0.5 * p.m_r * p.H * p.g * std::cos(a) -
                        0.5 * p.m_r * p.H * p.H * c.theta_ddot;
    check.report("dynamics_x", i, std::abs(ex));
    check.report("dynamics_y", i, std::abs(ey));
    check.report("dynamics_phi", i, std::abs(ephi));
  }

  for (int i = 0; i < T; ++i) {
    const BoardState& s0 = traj.states[i];
    const BoardState& s1 = traj.states[i + 1];
    const ControlSample& c0 = traj.controls[i];
    const ControlSample& c1 = traj.controls[i + 1];
    const double h = traj.durations[i];
    check.equal("defect_x", i, s1.x, s0.x + h * s1.xdot);
    check.equal("defect_y", i, s1.y, s0.y + h * s1.ydot);
    check.equal("defect_phi", i, s1.phi, s0.phi + h * s1.phidot);
    check.equal("defect_theta", i, c1.theta, c0.theta + h * c1.theta_dot);
    check.equal("defect_xdot", i, s1.xdot, s0.xdot + h * s0.xddot);
    check.equal("defect_ydot", i, s1.ydot, s0.ydot + h * s0.yddot);
    if (i == last_rear) {
      check.equal("reset_phidot", i, s1.phidot, -p.e * s0.phidot);
    } else {
      check.equal("defect_phidot", i, s1.phidot, s0.phidot + h * s0.phiddot);
    }
    check.equal("defect_thetadot", i, c1.theta_dot, c0.theta_dot + h * c0.theta_ddot);
    check.within("h_bounds", i, h, spec.h_min, spec.h_max);
  }

  for (int i = 0; i <= T; ++i) {
    check.within("theta_bounds", i, traj.controls[i].theta, 0.0, pi);
    check.within("thetaddot_bounds", i, traj.controls[i].theta_ddot, -spec.u_ddot_max,
                 spec.u_ddot_max);
    check.at_least("R1_nonneg", i, traj.forces[i].R1, 0.0);
    check.at_least("R2_nonneg", i, traj.forces[i].R2, 0.0);
  }

  auto clearance = [&](double phi) {
    return p.r + (p.d - p.r) * std::cos(phi) - p.w * std::sin(phi);
  };
  for (int i = 0; i <= T; ++i) {
    const BoardState& s = traj.states[i];
    const ReactionForces& f = traj.forces[i];
    if (i < sched.start[1]) {
      check.equal("s1_height", i, s.y, p.d);
      check.equal("s1_pitch", i, s.phi, 0.0);
      check.equal("s1_pitch_rate", i, s.phidot, 0.0);
    } else if (i < sched.start[2]) {
      check.equal("s2_front_unloaded", i, f.R1, 0.0);
      check.equal("s2_rear_pivot", i, s.y,
                  p.r + (p.d - p.r) * std::cos(s.phi) + 0.5 * p.L * std::sin(s.phi));
      check.at_least("s2_pitch_nonneg", i, s.phi, 0.0);
      if (i < last_rear) {
        check.at_least("s2_tail_clearance", i, clearance(s.phi), 0.0);
        check.at_least("s2_pitch_monotone", i, traj.states[i + 1].phi - s.phi, 0.0);
      } else {
        check.equal("s2_kickoff", i, clearance(s.phi), 0.0);
      }
    } else if (i < sched.start[3]) {
      check.equal("s3_front_airborne", i, f.R1, 0.0);
      check.equal("s3_rear_airborne", i, f.R2, 0.0);
      if (i == mid) check.equal("jump_height", i, s.y, spec.jump_height);
    } else if (i < sched.start[4]) {
      check.equal("s4_rear_unloaded", i, f.R2, 0.0);
      check.equal("s4_front_pivot", i, s.y,
                  p.r + (p.d - p.r) * std::cos(s.phi) - 0.5 * p.L * std::sin(s.phi));
      check.within("s4_pitch_nonpos", i, s.phi, -std::numeric_limits<double>::infinity(), 0.0);
      if (i + 1 < sched.start[4]) {
        check.at_least("s4_pitch_monotone", i, traj.states[i + 1].phi - s.phi, 0.0);
      }
    } else {
      check.equal("s5_height", i, s.y, p.d);
      check.equal("s5_pitch", i, s.phi, 0.0);
    }
  }

  const BoardState& first = traj.states.front();
  const BoardState& last = traj.states.back();
  check.equal("initial_theta", 0, traj.controls.front().theta, pi / 2.0);
  check.equal("final_theta", T, traj.controls.back().theta, pi / 2.0);
  check.equal("initial_xdot", 0, first.xdot, 0.0);
  check.equal("initial_ydot", 0, first.ydot, 0.0);
  check.equal("initial_phidot", 0, first.phidot, 0.0);
  check.equal("initial_thetadot", 0, traj.controls.front().theta_dot, 0.0);
  check.equal("final_xdot", T, last.xdot, 0.0);
  check.equal("final_ydot", T, last.ydot, 0.0);
  check.equal("final_phidot", T, last.phidot, 0.0);
  check.equal("final_thetadot", T, traj.controls.back().theta_dot, 0.0);
  check.equal("initial_balance", 0, traj.forces.front().R1, traj.forces.front().R2);
  check.equal("gauge_x", 0, first.x, 0.0);
  return report;
}

std::string VerificationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : violations) {
    arr.push_back({{"index", v.index}, {"name", v.name}, {"magnitude", v.magnitude}});
  }
  return arr.dump(2);
}

double EnergyAudit::relative_gain() const {
  const double scale = std::abs(pre_reset);
  if (scale == 0.0) return post_reset > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return (post_reset - pre_reset) / scale;
}

EnergyAudit energy_audit(const ProblemSpec& spec, const Trajectory& traj) {
  const SystemParams& p = spec.params;
  const double M = p.m_r + p.m_b;
  const double span = p.L + 2.0 * p.w;
  const double J = p.m_b * span * span / 12.0 + 0.5 * p.m_r * p.H * p.H;

  auto rotational = [&](double phidot) { return 0.5 * J * phidot * phidot; };
  auto energy = [&](const BoardState& s, const ControlSample& c, double phidot) {
    const double kinetic = 0.5 * M * (s.xdot * s.xdot + s.ydot * s.ydot) + rotational(phidot) +
                           0.5 * p.m_r * p.H * p.H * c.theta_dot * c.theta_dot;
    const double potential = M * p.g * s.y + p.m_r * p.g * p.H * std::sin(c.theta - s.phi);
    return kinetic + potential;
  };

  EnergyAudit audit;
  audit.energy.reserve(traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    audit.energy.push_back(energy(traj.states[i], traj.controls[i], traj.states[i].phidot));
  }
  const int k = spec.schedule.start[2] - 1;
  if (k >= 0 && static_cast<std::size_t>(k + 1) < traj.states.size()) {
    const BoardState& s = traj.states[k];
    const double before = s.phidot;
    const double after = traj.states[k + 1].phidot;
    audit.pre_reset = energy(s, traj.controls[k], before);
    audit.post_reset = energy(s, traj.controls[k], after);
    audit.rotational_pre = rotational(before);
    audit.rotational_post = rotational(after);
  }
  return audit;
}

}  // namespace ollie
