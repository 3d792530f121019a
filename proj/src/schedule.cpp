#include <cmath>
#include <numeric>
#include <sstream>

#include "ollie/errors.hpp"
#include "ollie/transcription.hpp"

namespace ollie {

int PhaseSchedule::section_of(int i) const {
  if (i < 0 || i > T) throw DomainError("timestep index outside [0, T]");
  for (int s = 1; s <= 4; ++s) {
    if (i < start[s]) return s;
  }
  return 5;
}

void PhaseSchedule::validate() const {
  if (T < 20) throw ScheduleError("schedule needs T >= 20");
  if (start[0] != 0 || start[5] != T) {
    throw ScheduleError("sections must partition [0, T]");
  }
  for (int s = 1; s <= 5; ++s) {
    if (section_size(s) < 2) {
      std::ostringstream os;
      os << "section " << s << " has fewer than 2 indices";
      throw ScheduleError(os.str());
    }
  }
  const int mid = midpoint();
  if (mid < start[2] || mid >= start[3]) {
    std::ostringstream os;
    os << "midpoint " << mid << " is not airborne: section 3 is [" << start[2] << ", "
       << start[3] << ")";
    throw ScheduleError(os.str());
  }
}

PhaseSchedule default_schedule(int T, const std::array<double, 5>& fractions) {
  if (T < 20) throw ScheduleError("schedule needs T >= 20");
  for (double f : fractions) {
    if (!(f > 0.0)) throw ScheduleError("phase fractions must be positive");
  }
  const double sum = std::accumulate(fractions.begin(), fractions.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) throw ScheduleError("phase fractions must sum to 1");

  PhaseSchedule schedule;
  schedule.T = T;
  double cumulative = 0.0;
  schedule.start[0] = 0;
  for (int s = 0; s < 4; ++s) {
    cumulative += fractions[s];
    schedule.start[s + 1] = static_cast<int>(std::lround(cumulative * T));
  }
  schedule.start[5] = T;
  schedule.validate();
  return schedule;
}

void Trajectory::update_time() {
  time.assign(durations.size() + 1, 0.0);
  for (std::size_t i = 0; i < durations.size(); ++i) time[i + 1] = time[i] + durations[i];
}

std::vector<double> encode(const DecisionLayout& layout, const Trajectory& traj) {
  if (traj.T() != layout.T || traj.states.size() != static_cast<std::size_t>(layout.T + 1) ||
      traj.controls.size() != traj.states.size() || traj.forces.size() != traj.states.size()) {
    throw DecodeError("trajectory dimensions do not match the layout");
  }
  using S = DecisionLayout;
  std::vector<double> raw(layout.total());
  for (int i = 0; i <= layout.T; ++i) {
    const BoardState& s = traj.states[i];
    const ControlSample& c = traj.controls[i];
    const ReactionForces& f = traj.forces[i];
    raw[layout.at(i, S::kX)] = s.x;
    raw[layout.at(i, S::kY)] = s.y;
    raw[layout.at(i, S::kPhi)] = s.phi;
    raw[layout.at(i, S::kXdot)] = s.xdot;
    raw[layout.at(i, S::kYdot)] = s.ydot;
    raw[layout.at(i, S::kPhidot)] = s.phidot;
    raw[layout.at(i, S::kXddot)] = s.xddot;
    raw[layout.at(i, S::kYddot)] = s.yddot;
    raw[layout.at(i, S::kPhiddot)] = s.phiddot;
    raw[layout.at(i, S::kTheta)] = c.theta;
    raw[layout.at(i, S::kThetadot)] = c.theta_dot;
    raw[layout.at(i, S::kThetaddot)] = c.theta_ddot;
    raw[layout.at(i, S::kR1)] = f.R1;
    raw[layout.at(i, S::kR2)] = f.R2;
  }
  for (int i = 0; i < layout.T; ++i) raw[layout.h(i)] = traj.durations[i];
  return raw;
}

Trajectory decode(const DecisionLayout& layout, std::span<const double> raw) {
  if (static_cast<int>(raw.size()) != layout.total()) {
    std::ostringstream os;
    os << "decision vector has " << raw.size() << " entries, layout expects " << layout.total();
    throw DecodeError(os.str());
  }
  using S = DecisionLayout;
  Trajectory traj;
  traj.states.resize(layout.T + 1);
  traj.controls.resize(layout.T + 1);
  traj.forces.resize(layout.T + 1);
  traj.durations.resize(layout.T);
  for (int i = 0; i <= layout.T; ++i) {
    BoardState& s = traj.states[i];
    s.x = raw[layout.at(i, S::kX)];
    s.y = raw[layout.at(i, S::kY)];
    s.phi = raw[layout.at(i, S::kPhi)];
    s.xdot = raw[layout.at(i, S::kXdot)];
    s.ydot = raw[layout.at(i, S::kYdot)];
    s.phidot = raw[layout.at(i, S::kPhidot)];
    s.xddot = raw[layout.at(i, S::kXddot)];
    s.yddot = raw[layout.at(i, S::kYddot)];
    s.phiddot = raw[layout.at(i, S::kPhiddot)];
    traj.controls[i] = {raw[layout.at(i, S::kTheta)], raw[layout.at(i, S::kThetadot)],
                        raw[layout.at(i, S::kThetaddot)]};
    traj.forces[i] = {raw[layout.at(i, S::kR1)], raw[layout.at(i, S::kR2)]};
  }
  for (int i = 0; i < layout.T; ++i) traj.durations[i] = raw[layout.h(i)];
  traj.update_time();
  return traj;
}

}  // namespace ollie
