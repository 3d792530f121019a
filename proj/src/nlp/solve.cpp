#include <algorithm>
#include <chrono>
#include <sstream>

#include "ollie/errors.hpp"
#include "ollie/nlp/solver.hpp"

namespace ollie::nlp {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kFeasible: return "feasible";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kIterationLimit: return "iteration-limit";
    case SolveStatus::kBackendError: return "backend-error";
  }
  return "unknown";
}

SolveResult solve(const NlpProblem& problem, std::span<const double> guess,
                  const SolveOptions& options, Backend* backend) {
  const auto started = std::chrono::steady_clock::now();
  problem.validate();
  if (static_cast<int>(guess.size()) != problem.num_variables) {
    throw InvalidInputError("guess length does not match the variable count");
  }

  SolveResult result;
  std::vector<double> start(guess.begin(), guess.end());
  int clamped = 0;
  for (int i = 0; i < problem.num_variables; ++i) {
    const double lo = problem.lower[i];
    const double hi = problem.upper[i];
    if (lo > hi) continue;  // reported below as an empty feasible set
    const double v = std::clamp(start[i], lo, hi);
    if (v != start[i]) ++clamped;
    start[i] = v;
  }
  if (clamped > 0) {
    std::ostringstream os;
    os << clamped << " guess entries were outside their bounds and were clamped";
    result.report.warnings.push_back(os.str());
  }

  const bool empty_box = [&] {
    for (int i = 0; i < problem.num_variables; ++i) {
      if (problem.lower[i] > problem.upper[i]) return true;
    }
    return false;
  }();

  // A point where some callback is non-finite reports infinite residuals.
  auto residuals_at = [&](std::span<const double> x) {
    try {
      return eval_residuals(problem, x);
    } catch (const std::exception&) {
      return Residuals{kInf, kInf, kInf};
    }
  };

  BackendResult raw;
  if (empty_box) {
    raw.x = start;
    raw.infeasible = true;
    raw.message = "a variable has lower bound above its upper bound";
  } else {
    InteriorPointBackend builtin;
    Backend& engine = backend ? *backend : builtin;
    try {
      raw = engine.run(problem, start, options);
    } catch (const std::exception& ex) {
      result.x = start;
      result.report.status = SolveStatus::kBackendError;
      result.report.message = ex.what();
      const Residuals res = residuals_at(start);
      result.report.max_equality_residual = res.max_equality;
      result.report.max_inequality_violation = res.max_inequality_violation;
      result.report.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      return result;
    }
  }

  result.x = std::move(raw.x);
  if (static_cast<int>(result.x.size()) != problem.num_variables) {
    result.x = start;
    result.report.status = SolveStatus::kBackendError;
    result.report.message = "backend returned a point of the wrong length";
  } else {
    if (!empty_box) {
      for (int i = 0; i < problem.num_variables; ++i) {
        result.x[i] = std::clamp(result.x[i], problem.lower[i], problem.upper[i]);
      }
    }
    // Never trust the backend's own verdict.
    const Residuals res = residuals_at(result.x);
    result.report.max_equality_residual = res.max_equality;
    result.report.max_inequality_violation =
        std::max(res.max_inequality_violation, res.max_bound_violation);
    const bool feasible = !empty_box && res.max_bound_violation <= 0.0 &&
                          res.max_equality <= options.equality_tolerance &&
                          res.max_inequality_violation <= options.inequality_tolerance;
    if (feasible) {
      result.report.status = SolveStatus::kFeasible;
    } else if (raw.infeasible) {
      result.report.status = SolveStatus::kInfeasible;
    } else if (raw.budget_exhausted || raw.iterations >= options.max_iterations) {
      result.report.status = SolveStatus::kIterationLimit;
    } else {
      result.report.status = SolveStatus::kInfeasible;
    }
    result.report.message = raw.message;
  }
  result.report.iterations = raw.iterations;
  result.report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace ollie::nlp
