#include "csv.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "ollie/errors.hpp"

namespace ollie::cli {

void write_trajectory_csv(std::ostream& out, const PhaseSchedule& schedule, const Trajectory& traj) {
  out << kTrajectoryHeader << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v + 0.0);  // no "-0" in output
    out << buf << ',';
  };
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const BoardState& s = traj.states[i];
    const ControlSample& c = traj.controls[i];
    const ReactionForces& f = traj.forces[i];
    for (double v : {traj.time[i], s.x, s.y, s.phi, s.xdot, s.ydot, s.phidot, s.xddot, s.yddot,
                     s.phiddot, c.theta, c.theta_dot, c.theta_ddot, f.R1, f.R2}) {
      put(v);
    }
    out << schedule.section_of(static_cast<int>(i)) << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in, int T) {
  std::string line;
  if (!std::getline(in, line)) throw DecodeError("trajectory CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader) throw DecodeError("trajectory CSV header does not match");

  std::vector<std::array<double, 15>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 15> row{};
    std::istringstream fields(line);
    std::string cell;
    int col = 0;
    while (std::getline(fields, cell, ',')) {
      if (col < 15) {
        const char* end = cell.data() + cell.size();
        auto [ptr, ec] = std::from_chars(cell.data(), end, row[col]);
        if (ec != std::errc() || ptr != end) {
          throw DecodeError("malformed number on line " + std::to_string(line_no));
        }
      }
      ++col;
    }
    if (col != 16) {
      throw DecodeError("line " + std::to_string(line_no) + " has " + std::to_string(col) +
                        " fields, expected 16");
    }
    rows.push_back(row);
  }
  if (static_cast<int>(rows.size()) != T + 1) {
    throw DecodeError("trajectory CSV has " + std::to_string(rows.size()) + " rows, expected " +
                      std::to_string(T + 1));
  }

  Trajectory traj;
  traj.states.resize(T + 1);
  traj.controls.resize(T + 1);
  traj.forces.resize(T + 1);
  traj.durations.resize(T);
  for (int i = 0; i <= T; ++i) {
    const auto& r = rows[i];
    traj.states[i] = {r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8], r[9]};
    traj.controls[i] = {r[10], r[11], r[12]};
    traj.forces[i] = {r[13], r[14]};
    if (i < T) traj.durations[i] = rows[i + 1][0] - r[0];
  }
  traj.time.resize(T + 1);
  for (int i = 0; i <= T; ++i) traj.time[i] = rows[i][0];
  return traj;
}

}  // namespace ollie::cli
