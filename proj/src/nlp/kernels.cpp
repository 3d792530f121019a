#include "ollie/nlp/kernels.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>

#include "ollie/errors.hpp"

namespace ollie::nlp {

namespace {

/// Runs body(i) for i in [0, n), serially or across OpenMP threads. The
/// first exception thrown by any iteration is rethrown after the loop.
template <typename Body>
void for_each_index(int n, Exec exec, Body&& body) {
  if (exec == Exec::kSerial) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void gather(const std::vector<int>& vars, std::span<const double> x, std::vector<double>& local) {
  local.resize(vars.size());
  for (std::size_t k = 0; k < vars.size(); ++k) local[k] = x[vars[k]];
}

double checked_value(const LocalValue& f, std::span<const double> local, int id) {
  const double v = f(local);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "non-finite value from constraint " << id;
    throw EvaluationError(os.str(), id);
  }
  return v;
}

/// Gradient of one callback at `local`: analytic when provided, otherwise
/// central differences with the documented step.
void local_gradient(const LocalValue& f, const LocalGradient& grad, std::vector<double>& local,
                    std::span<double> out, int id) {
  if (grad) {
    grad(local, out);
  } else {
    for (std::size_t k = 0; k < local.size(); ++k) {
      const double x0 = local[k];
      const double step = fd_step(x0);
      local[k] = x0 + step;
      const double fp = checked_value(f, local, id);
      local[k] = x0 - step;
      const double fm = checked_value(f, local, id);
      local[k] = x0;
      out[k] = (fp - fm) / (2.0 * step);
    }
  }
  for (double g : out) {
    if (!std::isfinite(g)) {
      std::ostringstream os;
      os << "non-finite gradient from constraint " << id;
      throw EvaluationError(os.str(), id);
    }
  }
}

/// Packed lower triangle (row-major, a >= b) of the Hessian of one callback.
void local_hessian(const LocalValue& f, const LocalGradient& grad, std::vector<double>& local,
                   double weight, std::span<double> out, int id) {
  const std::size_t k = local.size();
  if (grad) {
    std::vector<double> gp(k), gm(k);
    std::vector<double> full(k * k);
    for (std::size_t b = 0; b < k; ++b) {
      const double x0 = local[b];
      const double step = 1e-5 * std::max(1.0, std::abs(x0));
      local[b] = x0 + step;
      grad(local, gp);
      local[b] = x0 - step;
      grad(local, gm);
      local[b] = x0;
      for (std::size_t a = 0; a < k; ++a) full[a * k + b] = (gp[a] - gm[a]) / (2.0 * step);
    }
    std::size_t idx = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b <= a; ++b) {
        out[idx++] = weight * 0.5 * (full[a * k + b] + full[b * k + a]);
      }
    }
  } else {
    const double f0 = checked_value(f, local, id);
    std::size_t idx = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b <= a; ++b) {
        const double xa = local[a];
        const double sa = 1e-4 * std::max(1.0, std::abs(xa));
        double h;
        if (a == b) {
          local[a] = xa + sa;
          const double fp = checked_value(f, local, id);
          local[a] = xa - sa;
          const double fm = checked_value(f, local, id);
          local[a] = xa;
          h = (fp - 2.0 * f0 + fm) / (sa * sa);
        } else {
          const double xb = local[b];
          const double sb = 1e-4 * std::max(1.0, std::abs(xb));
          auto eval_at = [&](double da, double db) {
            local[a] = xa + da;
            local[b] = xb + db;
            return checked_value(f, local, id);
          };
          h = (eval_at(sa, sb) - eval_at(sa, -sb) - eval_at(-sa, sb) + eval_at(-sa, -sb)) /
              (4.0 * sa * sb);
          local[a] = xa;
          local[b] = xb;
        }
        out[idx++] = weight * h;
      }
    }
  }
}

int packed_size(std::size_t k) { return static_cast<int>(k * (k + 1) / 2); }

}  // namespace

EvalPlan::EvalPlan(const NlpProblem& problem) {
  const auto m = problem.constraints.size();
  jac_offset.assign(m + 1, 0);
  hess_offset.assign(m + 1, 0);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& c = problem.constraints[j];
    jac_offset[j + 1] = jac_offset[j] + static_cast<int>(c.vars.size());
    hess_offset[j + 1] = hess_offset[j] + (c.linear ? 0 : packed_size(c.vars.size()));
  }
  const auto t = problem.objective.size();
  obj_grad_offset.assign(t + 1, 0);
  obj_hess_offset.assign(t + 1, 0);
  for (std::size_t j = 0; j < t; ++j) {
    const auto& term = problem.objective[j];
    obj_grad_offset[j + 1] = obj_grad_offset[j] + static_cast<int>(term.vars.size());
    obj_hess_offset[j + 1] = obj_hess_offset[j] + packed_size(term.vars.size());
  }
}

void eval_constraint_values(const NlpProblem& problem, std::span<const double> x,
                            std::span<double> out, Exec exec) {
  const int m = static_cast<int>(problem.constraints.size());
  for_each_index(m, exec, [&](int j) {
    thread_local std::vector<double> local;
    const auto& c = problem.constraints[j];
    gather(c.vars, x, local);
    out[j] = checked_value(c.value, local, j);
  });
}

void eval_constraint_gradients(const NlpProblem& problem, const EvalPlan& plan,
                               std::span<const double> x, std::span<double> out, Exec exec) {
  const int m = static_cast<int>(problem.constraints.size());
  for_each_index(m, exec, [&](int j) {
    thread_local std::vector<double> local;
    const auto& c = problem.constraints[j];
    gather(c.vars, x, local);
    local_gradient(c.value, c.gradient, local,
                   out.subspan(plan.jac_offset[j], c.vars.size()), j);
  });
}

void eval_constraint_hessians(const NlpProblem& problem, const EvalPlan& plan,
                              std::span<const double> x, std::span<const double> weight,
                              std::span<double> out, Exec exec) {
  const int m = static_cast<int>(problem.constraints.size());
  for_each_index(m, exec, [&](int j) {
    const auto& c = problem.constraints[j];
    if (c.linear) return;
    const int begin = plan.hess_offset[j];
    const int size = plan.hess_offset[j + 1] - begin;
    if (weight[j] == 0.0) {
      std::fill_n(out.begin() + begin, size, 0.0);
      return;
    }
    thread_local std::vector<double> local;
    gather(c.vars, x, local);
    local_hessian(c.value, c.gradient, local, weight[j], out.subspan(begin, size), j);
  });
}

double eval_objective(const NlpProblem& problem, std::span<const double> x) {
  std::vector<double> local;
  double total = 0.0;
  for (std::size_t j = 0; j < problem.objective.size(); ++j) {
    const auto& term = problem.objective[j];
    gather(term.vars, x, local);
    total += checked_value(term.value, local, -1);
  }
  return total;
}

void eval_objective_gradients(const NlpProblem& problem, const EvalPlan& plan,
                              std::span<const double> x, std::span<double> out, Exec exec) {
  const int t = static_cast<int>(problem.objective.size());
  for_each_index(t, exec, [&](int j) {
    thread_local std::vector<double> local;
    const auto& term = problem.objective[j];
    gather(term.vars, x, local);
    local_gradient(term.value, term.gradient, local,
                   out.subspan(plan.obj_grad_offset[j], term.vars.size()), -1);
  });
}

void eval_objective_hessians(const NlpProblem& problem, const EvalPlan& plan,
                             std::span<const double> x, double weight, std::span<double> out,
                             Exec exec) {
  const int t = static_cast<int>(problem.objective.size());
  for_each_index(t, exec, [&](int j) {
    thread_local std::vector<double> local;
    const auto& term = problem.objective[j];
    gather(term.vars, x, local);
    const int begin = plan.obj_hess_offset[j];
    local_hessian(term.value, term.gradient, local, weight,
                  out.subspan(begin, plan.obj_hess_offset[j + 1] - begin), -1);
  });
}

SparseRowMatrix eval_jacobian(const NlpProblem& problem, std::span<const double> point,
                              Exec exec) {
  if (static_cast<int>(point.size()) != problem.num_variables) {
    throw InvalidInputError("point length does not match the variable count");
  }
  const EvalPlan plan(problem);
  std::vector<double> values(plan.jacobian_size());
  eval_constraint_gradients(problem, plan, point, values, exec);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(values.size());
  for (std::size_t j = 0; j < problem.constraints.size(); ++j) {
    const auto& vars = problem.constraints[j].vars;
    for (std::size_t k = 0; k < vars.size(); ++k) {
      triplets.emplace_back(static_cast<int>(j), vars[k], values[plan.jac_offset[j] + k]);
    }
  }
  SparseRowMatrix jac(static_cast<int>(problem.constraints.size()), problem.num_variables);
  jac.setFromTriplets(triplets.begin(), triplets.end());
  return jac;
}

Residuals eval_residuals(const NlpProblem& problem, std::span<const double> point) {
  std::vector<double> c(problem.constraints.size());
  eval_constraint_values(problem, point, c, Exec::kSerial);
  Residuals res;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (problem.constraints[j].kind == ConstraintKind::kEquality) {
      res.max_equality = std::max(res.max_equality, std::abs(c[j]));
    } else {
      res.max_inequality_violation = std::max(res.max_inequality_violation, -c[j]);
    }
  }
  for (int i = 0; i < problem.num_variables; ++i) {
    res.max_bound_violation =
        std::max({res.max_bound_violation, problem.lower[i] - point[i], point[i] - problem.upper[i]});
  }
  return res;
}

}  // namespace ollie::nlp
