#pragma once

// Per-constraint evaluation kernels. Each kernel has a serial reference
// loop and an OpenMP loop over constraints; both write into disjoint,
// precomputed slots so their results are bit-identical.

#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ollie/nlp/problem.hpp"

namespace ollie::nlp {

enum class Exec { kSerial, kParallel };

/// Offsets of every constraint's and objective term's slots in the flat
/// gradient and packed lower-triangular Hessian buffers.
struct EvalPlan {
  std::vector<int> jac_offset;       // per constraint, size m + 1
  std::vector<int> hess_offset;      // per constraint, size m + 1
  std::vector<int> obj_grad_offset;  // per objective term, size t + 1
  std::vector<int> obj_hess_offset;  // per objective term, size t + 1

  explicit EvalPlan(const NlpProblem& problem);
  int jacobian_size() const { return jac_offset.back(); }
  int hessian_size() const { return hess_offset.back(); }
  int objective_gradient_size() const { return obj_grad_offset.back(); }
  int objective_hessian_size() const { return obj_hess_offset.back(); }
};

/// Central-difference step used where a callback supplies no gradient.
inline double fd_step(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

void eval_constraint_values(const NlpProblem& problem, std::span<const double> x,
                            std::span<double> out, Exec exec = Exec::kParallel);

/// Local gradients, constraint j at [jac_offset[j], jac_offset[j + 1]).
void eval_constraint_gradients(const NlpProblem& problem, const EvalPlan& plan,
                               std::span<const double> x, std::span<double> out,
                               Exec exec = Exec::kParallel);

/// weight[j] times the packed lower triangle of each constraint's Hessian.
/// Linear constraints leave their slots at zero.
void eval_constraint_hessians(const NlpProblem& problem, const EvalPlan& plan,
                              std::span<const double> x, std::span<const double> weight,
                              std::span<double> out, Exec exec = Exec::kParallel);

double eval_objective(const NlpProblem& problem, std::span<const double> x);
void eval_objective_gradients(const NlpProblem& problem, const EvalPlan& plan,
                              std::span<const double> x, std::span<double> out,
                              Exec exec = Exec::kParallel);
void eval_objective_hessians(const NlpProblem& problem, const EvalPlan& plan,
                             std::span<const double> x, double weight, std::span<double> out,
                             Exec exec = Exec::kParallel);

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Constraint Jacobian (rows = constraints, cols = variables). Entries
/// outside each constraint's declared pattern are structurally zero.
SparseRowMatrix eval_jacobian(const NlpProblem& problem, std::span<const double> point,
                              Exec exec = Exec::kParallel);

/// Maximum |c| over equalities and max(0, -c) over inequalities.
struct Residuals {
  double max_equality = 0.0;
  double max_inequality_violation = 0.0;
  double max_bound_violation = 0.0;
};
Residuals eval_residuals(const NlpProblem& problem, std::span<const double> point);

}  // namespace ollie::nlp
