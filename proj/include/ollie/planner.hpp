#pragma once

// One call from a problem spec to a verified trajectory.

#include <cstdint>
#include <vector>

#include "ollie/nlp/solver.hpp"
#include "ollie/transcription.hpp"
#include "ollie/verify.hpp"

namespace ollie {

struct PlanOptions {
  nlp::SolveOptions solve;
  double verify_tolerance = 1e-5;
  /// Extra attempts from jittered copies of the initial guess when the
  /// first solve is not feasible.
  int restarts = 0;
  std::uint64_t seed = 0;
  GuessOptions guess;
};

struct PlanResult {
  std::vector<double> x;
  Trajectory trajectory;
  nlp::SolveReport report;
  VerificationReport verification;
  EnergyAudit energy;
  int attempts = 0;

  /// Feasible per the solver and clean per the verifier.
  bool ok() const { return report.status == nlp::SolveStatus::kFeasible && verification.ok(); }
  double peak_theta_ddot() const;
  /// From the kickoff index to the first front-wheel index [s].
  double time_of_flight(const PhaseSchedule& schedule) const;
};

PlanResult plan(const ProblemSpec& spec, const PlanOptions& options = {});

}  // namespace ollie
