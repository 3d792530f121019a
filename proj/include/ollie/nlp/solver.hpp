#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ollie/nlp/kernels.hpp"
#include "ollie/nlp/problem.hpp"

namespace ollie::nlp {

enum class SolveStatus { kFeasible, kInfeasible, kIterationLimit, kBackendError };

std::string_view to_string(SolveStatus status);

/// Primal block of the built-in backend's KKT system.
enum class HessianMode {
  kExact,        // Lagrangian Hessian with inertia correction
  kGaussNewton,  // barrier and objective terms only; constraint curvature dropped
};

struct SolveOptions {
  double equality_tolerance = 1e-6;
  double inequality_tolerance = 1e-6;
  int max_iterations = 3000;
  /// Divide each constraint row by max(1, |c_j(guess)|) inside the backend.
  bool row_scaling = false;
  /// KKT stationarity / complementarity target of the built-in backend.
  double optimality_tolerance = 1e-8;
  /// Stop as soon as the point is feasible instead of also driving the
  /// objective to a KKT point.
  bool stop_when_feasible = true;
  HessianMode hessian = HessianMode::kGaussNewton;
  /// Weight of the scaled proximal term added to the primal KKT block.
  double proximal_weight = 1e-4;
  double max_wall_time = std::numeric_limits<double>::infinity();
  Exec exec = Exec::kParallel;
  int verbosity = 0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::kBackendError;
  double max_equality_residual = 0.0;
  double max_inequality_violation = 0.0;
  int iterations = 0;
  double wall_time = 0.0;
  std::string message;
  std::vector<std::string> warnings;
};

struct SolveResult {
  std::vector<double> x;
  SolveReport report;
};

/// What a backend hands back; `solve` re-derives the status from residuals.
struct BackendResult {
  std::vector<double> x;
  int iterations = 0;
  bool converged = false;
  bool infeasible = false;
  bool budget_exhausted = false;  // iteration or wall-time limit hit
  std::string message;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  /// `start` lies within the variable bounds.
  virtual BackendResult run(const NlpProblem& problem, std::span<const double> start,
                            const SolveOptions& options) = 0;
};

/// Primal-dual barrier method with a sparse LDL^T of the full KKT system,
/// inertia-corrected regularization and a filter line search.
class InteriorPointBackend final : public Backend {
 public:
  std::string name() const override { return "interior-point"; }
  BackendResult run(const NlpProblem& problem, std::span<const double> start,
                    const SolveOptions& options) override;
};

/// Solves with `backend` (the built-in interior-point method when null).
/// The reported status is recomputed from the returned point: kFeasible
/// means every bound holds exactly and every constraint within tolerance.
SolveResult solve(const NlpProblem& problem, std::span<const double> guess,
                  const SolveOptions& options = {}, Backend* backend = nullptr);

}  // namespace ollie::nlp
