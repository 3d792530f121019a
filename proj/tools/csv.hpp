#pragma once

#include <iosfwd>
#include <string>

#include "ollie/transcription.hpp"

namespace ollie::cli {

inline constexpr const char* kTrajectoryHeader =
    "t,x,y,phi,xdot,ydot,phidot,xddot,yddot,phiddot,theta,thetadot,thetaddot,R1,R2,section";

/// One row per index, 17 significant digits.
void write_trajectory_csv(std::ostream& out, const PhaseSchedule& schedule, const Trajectory& traj);

/// Throws DecodeError on a wrong header, a malformed or missing row, or a
/// row count other than T + 1. Durations are recovered from t.
Trajectory read_trajectory_csv(std::istream& in, int T);

}  // namespace ollie::cli
