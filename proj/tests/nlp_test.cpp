#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ollie/errors.hpp"
#include "ollie/nlp/kernels.hpp"
#include "ollie/nlp/solver.hpp"
#include "ollie/transcription.hpp"

namespace ollie::nlp {
namespace {

Constraint linear_eq(std::vector<int> vars, std::vector<double> coef, double rhs) {
  Constraint c;
  c.kind = ConstraintKind::kEquality;
  c.vars = std::move(vars);
  c.linear = true;
  c.value = [coef, rhs](std::span<const double> v) {
    double s = -rhs;
    for (std::size_t k = 0; k < v.size(); ++k) s += coef[k] * v[k];
    return s;
  };
  return c;
}

NlpProblem box(int n, double lo, double hi) {
  NlpProblem p;
  p.num_variables = n;
  p.lower.assign(n, lo);
  p.upper.assign(n, hi);
  return p;
}

TEST(Solve, LinearToyHasUniqueSolution) {
  // a + b = 1, a - b = 0, a >= 0, b >= 0.
  NlpProblem p = box(2, 0.0, kInf);
  p.constraints.push_back(linear_eq({0, 1}, {1.0, 1.0}, 1.0));
  p.constraints.push_back(linear_eq({0, 1}, {1.0, -1.0}, 0.0));
  const std::vector<double> guess = {3.0, 0.2};
  const SolveResult res = solve(p, guess);
  ASSERT_EQ(res.report.status, SolveStatus::kFeasible) << res.report.message;
  EXPECT_NEAR(res.x[0], 0.5, 1e-8);
  EXPECT_NEAR(res.x[1], 0.5, 1e-8);
}

TEST(Solve, CircleAndDiagonalAcceptEitherRoot) {
  NlpProblem p = box(2, -kInf, kInf);
  Constraint circle;
  circle.vars = {0, 1};
  circle.value = [](std::span<const double> v) { return v[0] * v[0] + v[1] * v[1] - 1.0; };
  p.constraints.push_back(circle);
  p.constraints.push_back(linear_eq({0, 1}, {1.0, -1.0}, 0.0));
  const std::vector<double> guess = {0.3, -0.1};
  const SolveResult res = solve(p, guess);
  ASSERT_EQ(res.report.status, SolveStatus::kFeasible) << res.report.message;
  const double root = std::numbers::sqrt2 / 2.0;
  EXPECT_NEAR(std::abs(res.x[0]), root, 1e-8);
  EXPECT_NEAR(res.x[0], res.x[1], 1e-8);
}

TEST(Solve, EmptyFeasibleSetIsNeverFeasible) {
  // a >= 1 and a <= 0, once as inequalities and once as bounds.
  NlpProblem p = box(1, -kInf, kInf);
  Constraint ge;
  ge.kind = ConstraintKind::kInequality;
  ge.vars = {0};
  ge.linear = true;
  ge.value = [](std::span<const double> v) { return v[0] - 1.0; };
  Constraint le = ge;
  le.value = [](std::span<const double> v) { return -v[0]; };
  p.constraints = {ge, le};
  SolveOptions opts;
  opts.max_iterations = 200;
  const std::vector<double> guess = {0.5};
  const SolveResult res = solve(p, guess, opts);
  EXPECT_NE(res.report.status, SolveStatus::kFeasible);
  EXPECT_TRUE(res.report.status == SolveStatus::kInfeasible ||
              res.report.status == SolveStatus::kIterationLimit);

  NlpProblem boxed = box(1, 1.0, 0.0);
  const SolveResult res2 = solve(boxed, guess, opts);
  EXPECT_EQ(res2.report.status, SolveStatus::kInfeasible);
}

TEST(Solve, ToysInExactHessianMode) {
  SolveOptions exact;
  exact.hessian = HessianMode::kExact;
  NlpProblem lin = box(2, 0.0, kInf);
  lin.constraints.push_back(linear_eq({0, 1}, {1.0, 1.0}, 1.0));
  lin.constraints.push_back(linear_eq({0, 1}, {1.0, -1.0}, 0.0));
  const std::vector<double> g1 = {3.0, 0.2};
  SolveResult res = solve(lin, g1, exact);
  ASSERT_EQ(res.report.status, SolveStatus::kFeasible);
  EXPECT_NEAR(res.x[0], 0.5, 1e-8);

  NlpProblem circ = box(2, -kInf, kInf);
  Constraint circle;
  circle.vars = {0, 1};
  circle.value = [](std::span<const double> v) { return v[0] * v[0] + v[1] * v[1] - 1.0; };
  circ.constraints.push_back(circle);
  circ.constraints.push_back(linear_eq({0, 1}, {1.0, -1.0}, 0.0));
  const std::vector<double> g2 = {-2.0, 0.5};
  res = solve(circ, g2, exact);
  ASSERT_EQ(res.report.status, SolveStatus::kFeasible);
  EXPECT_NEAR(std::abs(res.x[0]), std::numbers::sqrt2 / 2.0, 1e-8);
}

TEST(Solve, ClampsGuessWithWarning) {
  NlpProblem p = box(2, 0.0, 1.0);
  p.constraints.push_back(linear_eq({0, 1}, {1.0, 1.0}, 1.0));
  const std::vector<double> guess = {5.0, -1.0};
  const SolveResult res = solve(p, guess);
  EXPECT_EQ(res.report.status, SolveStatus::kFeasible);
  ASSERT_EQ(res.report.warnings.size(), 1u);
}

TEST(Solve, NonFiniteConstraintIsBackendError) {
  NlpProblem p = box(1, -kInf, kInf);
  Constraint bad;
  bad.vars = {0};
  bad.value = [](std::span<const double> v) { return std::log(v[0]); };
  p.constraints.push_back(bad);
  const std::vector<double> guess = {-1.0};
  const SolveResult res = solve(p, guess);
  EXPECT_EQ(res.report.status, SolveStatus::kBackendError);
}

TEST(Solve, StatusIsRecomputedFromTheReturnedPoint) {
  // A backend that claims success at an infeasible point.
  struct Liar final : Backend {
    std::string name() const override { return "liar"; }
    BackendResult run(const NlpProblem&, std::span<const double> start,
                      const SolveOptions&) override {
      BackendResult r;
      r.x.assign(start.begin(), start.end());
      r.converged = true;
      return r;
    }
  } liar;
  NlpProblem p = box(1, -kInf, kInf);
  p.constraints.push_back(linear_eq({0}, {1.0}, 2.0));
  const std::vector<double> guess = {0.0};
  const SolveResult res = solve(p, guess, {}, &liar);
  EXPECT_NE(res.report.status, SolveStatus::kFeasible);
  EXPECT_NEAR(res.report.max_equality_residual, 2.0, 1e-15);
}

ProblemSpec table_spec(double height = 0.25) {
  ProblemSpec spec;
  spec.schedule = default_schedule(60);
  spec.jump_height = height;
  return spec;
}

std::vector<double> jittered_guess(const ProblemSpec& spec, std::uint64_t seed) {
  std::vector<double> x = initial_guess(spec);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.1);
  for (double& v : x) v += n(rng) * std::max(1.0, std::abs(v));
  return x;
}

TEST(Jacobian, LinearRowHasUnitEntry) {
  const ProblemSpec spec = table_spec();
  const ConstraintSet set = build_constraints(spec);
  const NlpProblem problem = to_nlp(set, spec);
  const std::vector<double> x = jittered_guess(spec, 1);
  const SparseRowMatrix jac = eval_jacobian(problem, x);
  bool found = false;
  for (std::size_t j = 0; j < problem.constraints.size(); ++j) {
    if (problem.constraints[j].label != "s1_height[3]") continue;
    found = true;
    const int y = set.layout.at(3, DecisionLayout::kY);
    EXPECT_EQ(jac.row(static_cast<int>(j)).nonZeros(), 1);
    EXPECT_EQ(jac.coeff(static_cast<int>(j), y), 1.0);
  }
  EXPECT_TRUE(found);
}

TEST(Jacobian, RearPivotRowAtLevelBoard) {
  const ProblemSpec spec = table_spec();
  const ConstraintSet set = build_constraints(spec);
  const NlpProblem problem = to_nlp(set, spec);
  std::vector<double> x = initial_guess(spec);
  const int i = spec.schedule.section_begin(2);
  const int phi = set.layout.at(i, DecisionLayout::kPhi);
  x[phi] = 0.0;
  const SparseRowMatrix jac = eval_jacobian(problem, x);
  for (std::size_t j = 0; j < problem.constraints.size(); ++j) {
    if (problem.constraints[j].label != "s2_rear_pivot[" + std::to_string(i) + "]") continue;
    // The row reads y - height(phi); the height slope at phi = 0 is L/2.
    EXPECT_NEAR(-jac.coeff(static_cast<int>(j), phi), 0.25, 1e-15);
    EXPECT_EQ(jac.coeff(static_cast<int>(j), set.layout.at(i, DecisionLayout::kY)), 1.0);
    return;
  }
  FAIL() << "rear pivot row not found";
}

TEST(Jacobian, AnalyticMatchesCentralDifferences) {
  const ProblemSpec spec = table_spec();
  NlpProblem analytic = to_nlp(build_constraints(spec), spec);
  NlpProblem numeric = analytic;
  for (auto& c : numeric.constraints) c.gradient = nullptr;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::vector<double> x = jittered_guess(spec, seed);
    const SparseRowMatrix a = eval_jacobian(analytic, x);
    const SparseRowMatrix n = eval_jacobian(numeric, x);
    ASSERT_EQ(a.nonZeros(), n.nonZeros());
    const SparseRowMatrix diff = a - n;
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k) {
      for (SparseRowMatrix::InnerIterator it(diff, k); it; ++it) {
        worst = std::max(worst, std::abs(it.value()));
      }
    }
    EXPECT_LT(worst, 1e-5) << "seed " << seed;
  }
}

TEST(Jacobian, PerturbingOutsideThePatternChangesNothing) {
  const ProblemSpec spec = table_spec();
  const NlpProblem problem = to_nlp(build_constraints(spec), spec);
  const int m = static_cast<int>(problem.constraints.size());
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> pick(0, problem.num_variables - 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x = jittered_guess(spec, 100 + trial);
    std::vector<double> base(m), moved(m);
    eval_constraint_values(problem, x, base);
    const int v = pick(rng);
    x[v] += 0.37 * std::max(1.0, std::abs(x[v]));
    eval_constraint_values(problem, x, moved);
    for (int j = 0; j < m; ++j) {
      const auto& vars = problem.constraints[j].vars;
      if (std::find(vars.begin(), vars.end(), v) == vars.end()) {
        ASSERT_EQ(base[j], moved[j]) << "constraint " << j << " variable " << v;
      }
    }
  }
}

TEST(Kernels, SerialAndParallelAreBitIdentical) {
  const ProblemSpec spec = table_spec();
  const NlpProblem problem = to_nlp(build_constraints(spec), spec);
  const EvalPlan plan(problem);
  const std::vector<double> x = jittered_guess(spec, 4);
  const int m = static_cast<int>(problem.constraints.size());
  std::vector<double> vs(m), vp(m);
  eval_constraint_values(problem, x, vs, Exec::kSerial);
  eval_constraint_values(problem, x, vp, Exec::kParallel);
  EXPECT_EQ(vs, vp);
  std::vector<double> gs(plan.jacobian_size()), gp(plan.jacobian_size());
  eval_constraint_gradients(problem, plan, x, gs, Exec::kSerial);
  eval_constraint_gradients(problem, plan, x, gp, Exec::kParallel);
  EXPECT_EQ(gs, gp);
  std::vector<double> w(m, 0.5);
  std::vector<double> hs(plan.hessian_size()), hp(plan.hessian_size());
  eval_constraint_hessians(problem, plan, x, w, hs, Exec::kSerial);
  eval_constraint_hessians(problem, plan, x, w, hp, Exec::kParallel);
  EXPECT_EQ(hs, hp);
}

TEST(Solve, DeterministicAcrossRunsAndExecutionModes) {
  const ProblemSpec spec = table_spec(0.3);
  const NlpProblem problem = to_nlp(build_constraints(spec), spec);
  const std::vector<double> guess = initial_guess(spec);
  SolveOptions serial;
  serial.exec = Exec::kSerial;
  const SolveResult a = solve(problem, guess);
  const SolveResult b = solve(problem, guess);
  const SolveResult c = solve(problem, guess, serial);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.x, c.x);
  EXPECT_EQ(a.report.iterations, b.report.iterations);
  EXPECT_EQ(a.report.status, b.report.status);
  EXPECT_EQ(a.report.max_equality_residual, c.report.max_equality_residual);
}

}  // namespace
}  // namespace ollie::nlp
