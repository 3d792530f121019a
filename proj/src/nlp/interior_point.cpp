// Built-in backend: a primal-dual log-barrier method with a filter line
// search in the style of Waechter & Biegler, solving the unreduced KKT
// system by sparse LDL^T with inertia correction.
//
//   min f(x)  s.t.  c_E(x) = 0,  c_I(x) - s = 0,  l <= (x, s) <= u
//
// Single-variable affine equalities and lb == ub variables are removed
// before the iteration starts.

#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ollie/errors.hpp"
#include "ollie/nlp/solver.hpp"

namespace ollie::nlp {

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

struct Presolve {
  std::vector<double> full;      // point in the original space
  std::vector<int> free_vars;    // free index -> original variable
  std::vector<int> free_index;   // original variable -> free index, -1 if fixed
  NlpProblem reduced;            // surviving constraints, original indexing
  bool infeasible = false;
  std::string message;
};

Presolve presolve(const NlpProblem& problem, std::span<const double> start,
                  const SolveOptions& options) {
  Presolve pre;
  const int n = problem.num_variables;
  pre.full.assign(start.begin(), start.end());
  std::vector<char> fixed(n, 0);
  auto fail = [&](const std::string& why) {
    pre.infeasible = true;
    if (pre.message.empty()) pre.message = why;
  };

  for (int i = 0; i < n; ++i) {
    if (problem.lower[i] == problem.upper[i]) {
      fixed[i] = 1;
      pre.full[i] = problem.lower[i];
    }
  }

  std::vector<char> consumed(problem.constraints.size(), 0);
  for (std::size_t j = 0; j < problem.constraints.size(); ++j) {
    const auto& c = problem.constraints[j];
    if (!c.linear || c.kind != ConstraintKind::kEquality || c.vars.size() != 1) continue;
    const double zero = 0.0;
    const double one = 1.0;
    const double b = c.value(std::span<const double>(&zero, 1));
    const double a = c.value(std::span<const double>(&one, 1)) - b;
    consumed[j] = 1;
    const int var = c.vars[0];
    if (std::abs(a) < 1e-300) {
      if (std::abs(b) > options.equality_tolerance) fail("constant equality is violated");
      continue;
    }
    const double v = -b / a;
    const double slack = 1e-12 * std::max(1.0, std::abs(v));
    if (fixed[var] && std::abs(pre.full[var] - v) > slack) {
      fail("conflicting fixed values for one variable");
    }
    if (v < problem.lower[var] - slack || v > problem.upper[var] + slack) {
      fail("fixed value lies outside the variable bounds");
    }
    fixed[var] = 1;
    pre.full[var] = std::clamp(v, problem.lower[var], problem.upper[var]);
  }

  pre.free_index.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (!fixed[i]) {
      pre.free_index[i] = static_cast<int>(pre.free_vars.size());
      pre.free_vars.push_back(i);
    }
  }

  pre.reduced.num_variables = n;
  pre.reduced.lower = problem.lower;
  pre.reduced.upper = problem.upper;
  pre.reduced.objective = problem.objective;
  std::vector<double> local;
  for (std::size_t j = 0; j < problem.constraints.size(); ++j) {
    if (consumed[j]) continue;
    const auto& c = problem.constraints[j];
    const bool all_fixed =
        std::all_of(c.vars.begin(), c.vars.end(), [&](int v) { return fixed[v] != 0; });
    if (all_fixed) {
      local.clear();
      for (int v : c.vars) local.push_back(pre.full[v]);
      const double value = c.value(local);
      if (c.kind == ConstraintKind::kEquality && std::abs(value) > options.equality_tolerance) {
        fail("equality over fixed variables is violated");
      }
      if (c.kind == ConstraintKind::kInequality && value < -options.inequality_tolerance) {
        fail("inequality over fixed variables is violated");
      }
      continue;
    }
    pre.reduced.constraints.push_back(c);
  }
  return pre;
}

struct JacEntry {
  int row;
  int col;
  int src;  // slot in the gradient buffer, -1 for a slack column
};

struct HessEntry {
  int a;
  int b;  // a >= b, free indices
  int src;
  bool objective;
};

class InteriorPoint {
 public:
  InteriorPoint(Presolve pre, const SolveOptions& options)
      : pre_(std::move(pre)), opt_(options), plan_(pre_.reduced) {
    const auto& cons = pre_.reduced.constraints;
    nx_ = static_cast<int>(pre_.free_vars.size());
    m_ = static_cast<int>(cons.size());
    slack_col_.assign(m_, -1);
    int ns = 0;
    for (int r = 0; r < m_; ++r) {
      if (cons[r].kind == ConstraintKind::kInequality) slack_col_[r] = nx_ + ns++;
    }
    N_ = nx_ + ns;

    lower_.resize(N_);
    upper_.resize(N_);
    for (int i = 0; i < nx_; ++i) {
      lower_[i] = pre_.reduced.lower[pre_.free_vars[i]];
      upper_[i] = pre_.reduced.upper[pre_.free_vars[i]];
    }
    for (int i = nx_; i < N_; ++i) {
      lower_[i] = 0.0;
      upper_[i] = kInf;
    }

    for (int r = 0; r < m_; ++r) {
      const auto& vars = cons[r].vars;
      for (std::size_t k = 0; k < vars.size(); ++k) {
        const int col = pre_.free_index[vars[k]];
        if (col >= 0) jac_.push_back({r, col, plan_.jac_offset[r] + static_cast<int>(k)});
      }
      if (slack_col_[r] >= 0) jac_.push_back({r, slack_col_[r], -1});
      if (!cons[r].linear) add_hessian_entries(vars, plan_.hess_offset[r], false);
    }
    for (std::size_t t = 0; t < pre_.reduced.objective.size(); ++t) {
      add_hessian_entries(pre_.reduced.objective[t].vars, plan_.obj_hess_offset[t], true);
    }
    jac_values_.resize(plan_.jacobian_size());
    hess_values_.resize(plan_.hessian_size());
    obj_grad_values_.resize(plan_.objective_gradient_size());
    obj_hess_values_.resize(plan_.objective_hessian_size());
    raw_c_.resize(m_);
    row_scale_.setOnes(m_);
    gauss_newton_ = opt_.hessian == HessianMode::kGaussNewton;
  }

  BackendResult run();

 private:
  void add_hessian_entries(const std::vector<int>& vars, int offset, bool objective) {
    int idx = offset;
    for (std::size_t a = 0; a < vars.size(); ++a) {
      for (std::size_t b = 0; b <= a; ++b, ++idx) {
        int fa = pre_.free_index[vars[a]];
        int fb = pre_.free_index[vars[b]];
        if (fa < 0 || fb < 0) continue;
        if (fa < fb) std::swap(fa, fb);
        hess_.push_back({fa, fb, idx, objective});
      }
    }
  }

  void scatter(const Vec& w) {
    for (int i = 0; i < nx_; ++i) pre_.full[pre_.free_vars[i]] = w[i];
  }

  /// Raw constraint values at w, then the scaled residual vector F(w).
  Vec residual(const Vec& w) {
    scatter(w);
    eval_constraint_values(pre_.reduced, pre_.full, raw_c_, opt_.exec);
    Vec F(m_);
    for (int r = 0; r < m_; ++r) {
      F[r] = row_scale_[r] * raw_c_[r] - (slack_col_[r] >= 0 ? w[slack_col_[r]] : 0.0);
    }
    return F;
  }

  /// Unscaled violation of the original constraints at the last residual().
  double true_violation() const {
    double worst = 0.0;
    const auto& cons = pre_.reduced.constraints;
    for (int r = 0; r < m_; ++r) {
      const double v = cons[r].kind == ConstraintKind::kEquality ? std::abs(raw_c_[r])
                                                                 : std::max(0.0, -raw_c_[r]);
      worst = std::max(worst, v);
    }
    return worst;
  }

  double objective(const Vec& w) {
    scatter(w);
    return eval_objective(pre_.reduced, pre_.full);
  }

  Vec objective_gradient(const Vec& w) {
    scatter(w);
    eval_objective_gradients(pre_.reduced, plan_, pre_.full, obj_grad_values_, opt_.exec);
    Vec g = Vec::Zero(N_);
    const auto& terms = pre_.reduced.objective;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      for (std::size_t k = 0; k < terms[t].vars.size(); ++k) {
        const int col = pre_.free_index[terms[t].vars[k]];
        if (col >= 0) g[col] += obj_grad_values_[plan_.obj_grad_offset[t] + k];
      }
    }
    return g;
  }

  void eval_jacobian_values(const Vec& w) {
    scatter(w);
    eval_constraint_gradients(pre_.reduced, plan_, pre_.full, jac_values_, opt_.exec);
  }

  double jac_value(const JacEntry& e) const {
    return e.src < 0 ? -1.0 : row_scale_[e.row] * jac_values_[e.src];
  }

  Vec jac_transpose_times(const Vec& y) const {
    Vec out = Vec::Zero(N_);
    for (const auto& e : jac_) out[e.col] += jac_value(e) * y[e.row];
    return out;
  }

  void eval_hessian_values(const Vec& w, const Vec& y) {
    scatter(w);
    std::vector<double> weight(m_);
    for (int r = 0; r < m_; ++r) weight[r] = y[r] * row_scale_[r];
    if (!gauss_newton_) {
      eval_constraint_hessians(pre_.reduced, plan_, pre_.full, weight, hess_values_, opt_.exec);
    }
    eval_objective_hessians(pre_.reduced, plan_, pre_.full, 1.0, obj_hess_values_, opt_.exec);
  }

  bool has_lower(int i) const { return std::isfinite(lower_[i]); }
  bool has_upper(int i) const { return std::isfinite(upper_[i]); }

  /// Log-barrier function with the usual linear damping on one-sided bounds.
  double barrier(const Vec& w, double f) const {
    double phi = f;
    for (int i = 0; i < N_; ++i) {
      const bool lo = has_lower(i);
      const bool hi = has_upper(i);
      if (lo) {
        const double gap = w[i] - lower_[i];
        if (gap <= 0.0) return kInf;
        phi -= mu_ * std::log(gap);
        if (!hi) phi += kDamping * mu_ * gap;
      }
      if (hi) {
        const double gap = upper_[i] - w[i];
        if (gap <= 0.0) return kInf;
        phi -= mu_ * std::log(gap);
        if (!lo) phi += kDamping * mu_ * gap;
      }
    }
    return phi;
  }

  Vec barrier_gradient(const Vec& w, const Vec& grad_f) const {
    Vec g = grad_f;
    for (int i = 0; i < N_; ++i) {
      const bool lo = has_lower(i);
      const bool hi = has_upper(i);
      if (lo) {
        g[i] -= mu_ / (w[i] - lower_[i]);
        if (!hi) g[i] += kDamping * mu_;
      }
      if (hi) {
        g[i] += mu_ / (upper_[i] - w[i]);
        if (!lo) g[i] -= kDamping * mu_;
      }
    }
    return g;
  }

  double fraction_to_boundary(const Vec& w, const Vec& dw, double tau) const {
    double alpha = 1.0;
    for (int i = 0; i < N_; ++i) {
      if (has_lower(i) && dw[i] < 0.0) {
        alpha = std::min(alpha, -tau * (w[i] - lower_[i]) / dw[i]);
      }
      if (has_upper(i) && dw[i] > 0.0) {
        alpha = std::min(alpha, tau * (upper_[i] - w[i]) / dw[i]);
      }
    }
    return alpha;
  }

  static double fraction_to_boundary_dual(const Vec& z, const Vec& dz, double tau) {
    double alpha = 1.0;
    for (int i = 0; i < z.size(); ++i) {
      if (dz[i] < 0.0 && z[i] > 0.0) alpha = std::min(alpha, -tau * z[i] / dz[i]);
    }
    return alpha;
  }

  void assemble_kkt(const Vec& sigma, double delta_w, double delta_c) {
    triplets_.clear();
    for (const auto& e : hess_) {
      if (gauss_newton_ && !e.objective) continue;  // constraint curvature dropped
      const double v = e.objective ? obj_hess_values_[e.src] : hess_values_[e.src];
      triplets_.emplace_back(e.a, e.b, v);
      if (e.a != e.b) triplets_.emplace_back(e.b, e.a, v);
    }
    for (int i = 0; i < N_; ++i) {
      triplets_.emplace_back(i, i, sigma[i] + delta_w + opt_.proximal_weight * prox_[i]);
    }
    for (const auto& e : jac_) {
      const double v = jac_value(e);
      triplets_.emplace_back(N_ + e.row, e.col, v);
      triplets_.emplace_back(e.col, N_ + e.row, v);
    }
    for (int r = 0; r < m_; ++r) triplets_.emplace_back(N_ + r, N_ + r, -delta_c);
    kkt_.resize(N_ + m_, N_ + m_);
    kkt_.setFromTriplets(triplets_.begin(), triplets_.end());
  }

  enum class Factor { kOk, kSingular, kWrongInertia };

  /// LDL^T of the KKT matrix; the inertia must be (N, m, 0) for the step to
  /// be a descent direction of the barrier model on the constraint tangent.
  Factor factorize() {
    if (!pattern_analyzed_) {
      ldlt_.analyzePattern(kkt_);
      pattern_analyzed_ = true;
    }
    ldlt_.factorize(kkt_);
    if (ldlt_.info() != Eigen::Success) return Factor::kSingular;
    const Vec& D = ldlt_.vectorD();
    int positive = 0;
    int negative = 0;
    for (int i = 0; i < D.size(); ++i) {
      if (!std::isfinite(D[i]) || D[i] == 0.0) return Factor::kSingular;
      (D[i] > 0.0 ? positive : negative)++;
    }
    return positive == N_ && negative == m_ ? Factor::kOk : Factor::kWrongInertia;
  }

  void log(const char* fmt, ...) const;

  struct FilterEntry {
    double theta;
    double phi;
  };

  bool in_filter(double theta, double phi) const {
    for (const auto& e : filter_) {
      if (theta >= e.theta && phi >= e.phi) return true;
    }
    return false;
  }

  /// Filter acceptance of a trial point; sets f_type when the step was
  /// judged on the barrier decrease alone.
  bool acceptable(double theta, double phi, double theta0, double phi0, double gd, double alpha,
                  bool& f_type) const {
    if (!std::isfinite(phi) || theta > theta_max_) return false;
    if (opt_.stop_when_feasible) {
      f_type = false;
      return theta <= (1.0 - kGammaTheta) * theta0;
    }
    if (in_filter(theta, phi)) return false;
    f_type = gd < 0.0 && theta0 <= theta_min_ &&
             alpha * std::pow(-gd, kSPhi) > std::pow(theta0, kSTheta);
    if (f_type) return phi <= phi0 + kEta * alpha * gd;
    return theta <= (1.0 - kGammaTheta) * theta0 || phi <= phi0 - kGammaPhi * theta0;
  }

  static constexpr double kGammaTheta = 1e-5;
  static constexpr double kGammaPhi = 1e-8;
  static constexpr double kGammaAlpha = 0.05;
  static constexpr double kSTheta = 1.1;
  static constexpr double kSPhi = 2.3;
  static constexpr double kEta = 1e-4;

  static constexpr double kDamping = 1e-4;

  Presolve pre_;
  SolveOptions opt_;
  EvalPlan plan_;
  int nx_ = 0;
  int m_ = 0;
  int N_ = 0;
  std::vector<int> slack_col_;
  Vec lower_, upper_;
  Vec row_scale_;
  Vec prox_;  // 1 / typical_scale^2 per primal variable
  std::vector<JacEntry> jac_;
  std::vector<HessEntry> hess_;
  std::vector<double> jac_values_, hess_values_, obj_grad_values_, obj_hess_values_;
  std::vector<double> raw_c_;
  std::vector<Eigen::Triplet<double>> triplets_;
  SpMat kkt_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool pattern_analyzed_ = false;
  double mu_ = 0.1;
  std::vector<FilterEntry> filter_;
  double theta_min_ = 0.0;
  double theta_max_ = kInf;
  int restorations_ = 0;
  bool gauss_newton_ = false;
};

void InteriorPoint::log(const char* fmt, ...) const {
  if (opt_.verbosity <= 0) return;
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  va_end(args);
}

BackendResult InteriorPoint::run() {
  const auto started = std::chrono::steady_clock::now();
  BackendResult out;
  const double tol = opt_.optimality_tolerance;
  const double feas_target =
      0.01 * std::min(opt_.equality_tolerance, opt_.inequality_tolerance);

  // Starting point pushed strictly inside the bounds.
  Vec w = Vec::Zero(N_);
  for (int i = 0; i < nx_; ++i) w[i] = pre_.full[pre_.free_vars[i]];
  residual(w);  // fills raw_c_ at the start point
  if (opt_.row_scaling) {
    for (int r = 0; r < m_; ++r) row_scale_[r] = 1.0 / std::max(1.0, std::abs(raw_c_[r]));
  }
  for (int r = 0; r < m_; ++r) {
    if (slack_col_[r] >= 0) w[slack_col_[r]] = row_scale_[r] * raw_c_[r];
  }
  constexpr double kPush = 1e-2;
  for (int i = 0; i < N_; ++i) {
    const bool lo = has_lower(i);
    const bool hi = has_upper(i);
    if (lo && hi) {
      const double pl = std::min(kPush * std::max(1.0, std::abs(lower_[i])),
                                 kPush * (upper_[i] - lower_[i]));
      const double pu = std::min(kPush * std::max(1.0, std::abs(upper_[i])),
                                 kPush * (upper_[i] - lower_[i]));
      w[i] = std::clamp(w[i], lower_[i] + pl, upper_[i] - pu);
    } else if (lo) {
      w[i] = std::max(w[i], lower_[i] + kPush * std::max(1.0, std::abs(lower_[i])));
    } else if (hi) {
      w[i] = std::min(w[i], upper_[i] - kPush * std::max(1.0, std::abs(upper_[i])));
    }
  }

  prox_.resize(N_);
  for (int i = 0; i < N_; ++i) {
    double scale = std::max(1.0, std::abs(w[i]));
    if (has_lower(i) && has_upper(i)) scale = std::min(scale, upper_[i] - lower_[i]);
    prox_[i] = 1.0 / (scale * scale);
  }

  Vec zl = Vec::Zero(N_), zu = Vec::Zero(N_);
  for (int i = 0; i < N_; ++i) {
    if (has_lower(i)) zl[i] = 1.0;
    if (has_upper(i)) zu[i] = 1.0;
  }
  Vec y = Vec::Zero(m_);
  mu_ = 0.1;
  double delta_w_last = 0.0;
  int acceptable_count = 0;
  int failures = 0;

  std::vector<double> best_full = pre_.full;
  double best_violation = kInf;

  Vec F = residual(w);
  double f = objective(w);
  const double theta_start = F.lpNorm<1>();
  // In feasibility mode the barrier value never overrules a violation decrease.
  theta_min_ = opt_.stop_when_feasible ? 0.0 : 1e-4 * std::max(1.0, theta_start);
  theta_max_ = 1e4 * std::max(1.0, theta_start);

  int iter = 0;
  for (;; ++iter) {
    const double violation = true_violation();
    if (violation < best_violation) {
      best_violation = violation;
      scatter(w);
      best_full = pre_.full;
    }

    const Vec grad_f = objective_gradient(w);
    eval_jacobian_values(w);

    const Vec dual = grad_f + jac_transpose_times(y) - zl + zu;
    double compl0 = 0.0;
    for (int i = 0; i < N_; ++i) {
      if (has_lower(i)) compl0 = std::max(compl0, (w[i] - lower_[i]) * zl[i]);
      if (has_upper(i)) compl0 = std::max(compl0, (upper_[i] - w[i]) * zu[i]);
    }
    const double s_max = 100.0;
    const double zsum = zl.lpNorm<1>() + zu.lpNorm<1>();
    const double s_d =
        std::max(s_max, (y.lpNorm<1>() + zsum) / std::max(1, m_ + 2 * N_)) / s_max;
    const double s_c = std::max(s_max, zsum / std::max(1, 2 * N_)) / s_max;
    const double dual_err = N_ > 0 ? dual.lpNorm<Eigen::Infinity>() / s_d : 0.0;
    const double primal_err = m_ > 0 ? F.lpNorm<Eigen::Infinity>() : 0.0;
    const double compl_err = compl0 / s_c;

    log("%4d f=% .6e inf_pr=%.3e inf_du=%.3e viol=%.3e mu=%.1e\n", iter, f, primal_err,
        dual_err, violation, mu_);

    if (opt_.stop_when_feasible && violation <= feas_target) {
      out.converged = true;
      out.message = "reached a feasible point";
      break;
    }
    if (dual_err <= tol && compl_err <= tol && primal_err <= tol && violation <= feas_target) {
      out.converged = true;
      out.message = "converged to the requested KKT tolerance";
      break;
    }
    if (dual_err <= 1e-6 && compl_err <= 1e-6 && violation <= feas_target) {
      if (++acceptable_count >= 15) {
        out.converged = true;
        out.message = "converged to an acceptable KKT tolerance";
        break;
      }
    } else {
      acceptable_count = 0;
    }
    if (iter >= opt_.max_iterations) {
      out.budget_exhausted = true;
      out.message = "iteration limit reached";
      break;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (elapsed > opt_.max_wall_time) {
      out.budget_exhausted = true;
      out.message = "wall-time limit reached";
      break;
    }

    // Monotone barrier update.
    const double mu_min = tol / 10.0;
    for (;;) {
      double compl_mu = 0.0;
      for (int i = 0; i < N_; ++i) {
        if (has_lower(i)) compl_mu = std::max(compl_mu, std::abs((w[i] - lower_[i]) * zl[i] - mu_));
        if (has_upper(i)) compl_mu = std::max(compl_mu, std::abs((upper_[i] - w[i]) * zu[i] - mu_));
      }
      const double err_mu = std::max({dual_err, primal_err, compl_mu / s_c});
      if (err_mu > 10.0 * mu_ || mu_ <= mu_min) break;
      mu_ = std::max(mu_min, std::min(0.2 * mu_, std::pow(mu_, 1.5)));
      filter_.clear();
    }
    const double tau = std::max(0.99, 1.0 - mu_);

    eval_hessian_values(w, y);
    Vec sigma = Vec::Zero(N_);
    for (int i = 0; i < N_; ++i) {
      if (has_lower(i)) sigma[i] += zl[i] / (w[i] - lower_[i]);
      if (has_upper(i)) sigma[i] += zu[i] / (upper_[i] - w[i]);
    }
    const Vec grad_phi = barrier_gradient(w, grad_f);
    Vec rhs(N_ + m_);
    rhs.head(N_) = -(grad_phi + jac_transpose_times(y));
    rhs.tail(m_) = -F;

    // Regularize until the factorization has the right inertia.
    bool line_search_ok = false;
    Vec dw, dy, dzl(N_), dzu(N_);
    double delta_w = 0.0;
    double delta_c = 0.0;
    for (int retry = 0; retry < 4 && !line_search_ok; ++retry) {
      bool step_ok = false;
      for (int attempt = 0; attempt < 80; ++attempt) {
        assemble_kkt(sigma, delta_w, delta_c);
        const Factor status = factorize();
        if (status == Factor::kSingular && delta_c == 0.0) {
          delta_c = 1e-8 * std::pow(mu_, 0.25);
          continue;
        }
        if (status == Factor::kOk) {
          const Vec sol = ldlt_.solve(rhs);
          if (sol.allFinite()) {
            dw = sol.head(N_);
            dy = sol.tail(m_);
            step_ok = true;
            break;
          }
        }
        if (delta_w == 0.0) {
          delta_w = delta_w_last == 0.0 ? 1e-4 : std::max(1e-20, delta_w_last / 3.0);
        } else {
          delta_w *= delta_w_last == 0.0 ? 100.0 : 8.0;
        }
        if (delta_w > 1e40) break;
      }
      if (!step_ok) {
        out.message = "KKT system could not be regularized";
        break;
      }
      if (delta_w > 0.0) delta_w_last = delta_w;

      for (int i = 0; i < N_; ++i) {
        dzl[i] = has_lower(i)
                     ? (mu_ - zl[i] * (w[i] - lower_[i]) - zl[i] * dw[i]) / (w[i] - lower_[i])
                     : 0.0;
        dzu[i] = has_upper(i)
                     ? (mu_ - zu[i] * (upper_[i] - w[i]) + zu[i] * dw[i]) / (upper_[i] - w[i])
                     : 0.0;
      }

      // Filter line search on (constraint violation, barrier value).
      const double theta0 = F.lpNorm<1>();
      const double gd = grad_phi.dot(dw);
      const double phi0 = barrier(w, f);
      const double alpha_max = fraction_to_boundary(w, dw, tau);
      const double alpha_min =
          gd < 0.0 ? kGammaAlpha * std::min({kGammaTheta, kGammaPhi * theta0 / -gd,
                                             std::pow(theta0, kSTheta) / std::pow(-gd, kSPhi)})
                   : kGammaAlpha * kGammaTheta;
      double alpha = alpha_max;
      Vec w_trial;
      Vec F_trial;
      double f_trial = 0.0;
      bool f_type = false;
      // Fallback for restoration: the trial with the smallest violation.
      double best_theta = theta0;
      Vec best_w;
      if (opt_.stop_when_feasible && m_ > 0) {
        // Feasibility mode: a full normal step that halves the violation wins.
        Vec rhs_n = Vec::Zero(N_ + m_);
        rhs_n.tail(m_) = -F;
        const Vec sol = ldlt_.solve(rhs_n);
        if (sol.allFinite()) {
          const Vec dn = sol.head(N_);
          const double a = fraction_to_boundary(w, dn, tau);
          const Vec w_n = w + a * dn;
          const Vec F_n = residual(w_n);
          if (F_n.lpNorm<1>() <= 0.5 * theta0) {
            w_trial = w_n;
            F_trial = F_n;
            f_trial = objective(w_n);
            alpha = a;
            dy = sol.tail(m_);
            for (int i = 0; i < N_; ++i) {
              dzl[i] = has_lower(i) ? (mu_ - zl[i] * (w[i] - lower_[i]) - zl[i] * dn[i]) /
                                          (w[i] - lower_[i])
                                    : 0.0;
              dzu[i] = has_upper(i) ? (mu_ - zu[i] * (upper_[i] - w[i]) + zu[i] * dn[i]) /
                                          (upper_[i] - w[i])
                                    : 0.0;
            }
            line_search_ok = true;
          }
        }
      }
      for (int ls = 0; ls < 60 && alpha >= alpha_min && !line_search_ok; ++ls) {
        w_trial = w + alpha * dw;
        F_trial = residual(w_trial);
        f_trial = objective(w_trial);
        const double theta = F_trial.lpNorm<1>();
        const double phi = barrier(w_trial, f_trial);
        if (theta < best_theta) {
          best_theta = theta;
          best_w = w_trial;
        }
        if (acceptable(theta, phi, theta0, phi0, gd, alpha, f_type)) {
          line_search_ok = true;
          break;
        }
        if (ls == 0 && m_ > 0 && theta >= theta0) {
          // Second-order correction against the curvature of c.
          Vec rhs_soc = rhs;
          rhs_soc.tail(m_) = -(alpha * F + F_trial);
          const Vec sol = ldlt_.solve(rhs_soc);
          if (sol.allFinite()) {
            const Vec dw_soc = sol.head(N_);
            const double alpha_soc = fraction_to_boundary(w, dw_soc, tau);
            const Vec w_soc = w + alpha_soc * dw_soc;
            const Vec F_soc = residual(w_soc);
            const double f_soc = objective(w_soc);
            const double theta_soc = F_soc.lpNorm<1>();
            const double phi_soc = barrier(w_soc, f_soc);
            if (acceptable(theta_soc, phi_soc, theta0, phi0, gd, alpha, f_type)) {
              w_trial = w_soc;
              F_trial = F_soc;
              f_trial = f_soc;
              line_search_ok = true;
              break;
            }
          }
        }
        alpha *= 0.5;
      }
      if (!line_search_ok && m_ > 0) {
        // Normal step: the smallest move in the KKT metric that removes the
        // linearized violation, ignoring the barrier gradient.
        Vec rhs_n = Vec::Zero(N_ + m_);
        rhs_n.tail(m_) = -F;
        const Vec sol = ldlt_.solve(rhs_n);
        if (sol.allFinite()) {
          const Vec dn = sol.head(N_);
          double a = fraction_to_boundary(w, dn, tau);
          for (int ls = 0; ls < 30; ++ls, a *= 0.5) {
            const Vec w_n = w + a * dn;
            const Vec F_n = residual(w_n);
            const double theta = F_n.lpNorm<1>();
            if (theta < best_theta) {
              best_theta = theta;
              best_w = w_n;
            }
            if (theta <= (1.0 - kGammaTheta) * theta0) break;
          }
        }
      }
      if (!line_search_ok && best_w.size() > 0 && best_theta < (1.0 - kGammaTheta) * theta0) {
        // Restoration by violation decrease alone; the filter starts over.
        w_trial = best_w;
        F_trial = residual(w_trial);
        f_trial = objective(w_trial);
        filter_.clear();
        f_type = true;
        line_search_ok = true;
        ++restorations_;
      }
      if (line_search_ok && !f_type) {
        filter_.push_back({(1.0 - kGammaTheta) * theta0, phi0 - kGammaPhi * theta0});
      }

      if (line_search_ok) {
        const double alpha_z =
            std::min(fraction_to_boundary_dual(zl, dzl, tau), fraction_to_boundary_dual(zu, dzu, tau));
        w = w_trial;
        F = F_trial;
        f = f_trial;
        y += alpha * dy;
        zl += alpha_z * dzl;
        zu += alpha_z * dzu;
        constexpr double kSigmaCap = 1e10;
        for (int i = 0; i < N_; ++i) {
          if (has_lower(i)) {
            const double gap = w[i] - lower_[i];
            zl[i] = std::clamp(zl[i], mu_ / (kSigmaCap * gap), kSigmaCap * mu_ / gap);
          }
          if (has_upper(i)) {
            const double gap = upper_[i] - w[i];
            zu[i] = std::clamp(zu[i], mu_ / (kSigmaCap * gap), kSigmaCap * mu_ / gap);
          }
        }
        failures = 0;
        log("      alpha=%.3e alpha_max=%.3e delta_w=%.1e\n", alpha, alpha_max, delta_w);
      } else {
        // Retry from the same point with a stiffer primal block.
        delta_w = std::max(1e-4, 10.0 * std::max(delta_w, delta_w_last));
        residual(w);
      }
    }
    if (!line_search_ok) {
      residual(w);
      if (++failures >= 5 || out.message == "KKT system could not be regularized") {
        out.infeasible = true;
        if (out.message.empty()) out.message = "line search failed repeatedly";
        break;
      }
      // Give up on the current multipliers.
      y.setZero();
    }
  }

  out.iterations = iter;
  if (out.converged) {
    scatter(w);
    out.x = pre_.full;
  } else {
    residual(w);
    if (true_violation() <= best_violation) {
      scatter(w);
      out.x = pre_.full;
    } else {
      out.x = best_full;
    }
  }
  return out;
}

}  // namespace

BackendResult InteriorPointBackend::run(const NlpProblem& problem, std::span<const double> start,
                                        const SolveOptions& options) {
  Presolve pre = presolve(problem, start, options);
  if (pre.infeasible) {
    BackendResult out;
    out.x = pre.full;
    out.infeasible = true;
    out.message = "presolve: " + pre.message;
    return out;
  }
  InteriorPoint ipm(std::move(pre), options);
  return ipm.run();
}

}  // namespace ollie::nlp
