#include "ollie/planner.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ollie {

double PlanResult::peak_theta_ddot() const {
  double peak = 0.0;
  for (const auto& c : trajectory.controls) peak = std::max(peak, std::abs(c.theta_ddot));
  return peak;
}

double PlanResult::time_of_flight(const PhaseSchedule& schedule) const {
  if (trajectory.time.empty()) return 0.0;
  return trajectory.time[schedule.start[3]] - trajectory.time[schedule.kickoff_index()];
}

PlanResult plan(const ProblemSpec& spec, const PlanOptions& options) {
  const ConstraintSet set = build_constraints(spec);
  const nlp::NlpProblem problem = to_nlp(set, spec);
  const std::vector<double> guess = initial_guess(spec, options.guess);

  PlanResult best;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int attempt = 0; attempt <= std::max(0, options.restarts); ++attempt) {
    std::vector<double> start = guess;
    if (attempt > 0) {
      for (double& v : start) v += 0.05 * std::max(1.0, std::abs(v)) * noise(rng);
    }
    nlp::SolveResult solved = nlp::solve(problem, start, options.solve);
    const bool better = attempt == 0 ||
                        solved.report.max_equality_residual < best.report.max_equality_residual ||
                        solved.report.status == nlp::SolveStatus::kFeasible;
    if (better) {
      best.x = std::move(solved.x);
      best.report = std::move(solved.report);
    }
    best.attempts = attempt + 1;
    if (best.report.status == nlp::SolveStatus::kFeasible) break;
  }

  best.trajectory = decode(set.layout, best.x);
  best.verification = verify_trajectory(spec, best.trajectory, options.verify_tolerance);
  best.energy = energy_audit(spec, best.trajectory);
  return best;
}

}  // namespace ollie
