#pragma once

// Post-hoc checks of a decoded trajectory. Every rule is evaluated from its
// own expressions here; nothing is shared with the constraint builder, so a
// disagreement between the two points at a bug in one of them.

#include <string>
#include <vector>

#include "ollie/transcription.hpp"

namespace ollie {

struct Violation {
  int index = 0;
  std::string name;  // same vocabulary as the builder's record names
  double magnitude = 0.0;
};

struct VerificationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  /// JSON array of {index, name, magnitude}.
  std::string to_json() const;
};

/// Throws StructuralError when the trajectory does not match the schedule.
VerificationReport verify_trajectory(const ProblemSpec& spec, const Trajectory& traj, double tol);

struct EnergyAudit {
  std::vector<double> energy;  // kinetic + potential per index [J]
  double pre_reset = 0.0;      // at the kickoff index, before the pitch-rate reset
  double post_reset = 0.0;     // same configuration with the reset pitch rate
  double rotational_pre = 0.0;
  double rotational_post = 0.0;
  double kickoff_loss() const { return pre_reset - post_reset; }
  /// (post - pre) / |pre|; positive means the junction created energy.
  double relative_gain() const;
};

/// Board and rider lumped at the board COM for translation, the board's
/// pitch inertia for phidot, the rider on its lever arm for theta_dot.
EnergyAudit energy_audit(const ProblemSpec& spec, const Trajectory& traj);

}  // namespace ollie
