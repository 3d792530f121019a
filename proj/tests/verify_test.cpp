#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include <json.hpp>

#include "ollie/errors.hpp"
#include "ollie/planner.hpp"
#include "ollie/verify.hpp"

namespace ollie {
namespace {

using S = DecisionLayout;
using Key = std::pair<std::string, int>;

ProblemSpec spec_at(double height = 0.25) {
  ProblemSpec spec;
  spec.schedule = default_schedule(60);
  spec.jump_height = height;
  return spec;
}

// One feasible solve shared by the tests below.
const PlanResult& solved() {
  static const PlanResult r = plan(spec_at());
  return r;
}

std::set<Key> builder_violations(const ConstraintSet& set, const std::vector<double>& raw,
                                 double tol) {
  std::set<Key> out;
  for (const auto& r : set.records) {
    if (r.violation(raw) > tol) out.insert({r.name, r.index});
  }
  return out;
}

std::set<Key> verifier_violations(const VerificationReport& rep) {
  std::set<Key> out;
  for (const auto& v : rep.violations) out.insert({v.name, v.index});
  return out;
}

TEST(Verify, SolvedTrajectoryIsClean) {
  const PlanResult& r = solved();
  ASSERT_EQ(r.report.status, nlp::SolveStatus::kFeasible) << r.report.message;
  const VerificationReport rep = verify_trajectory(spec_at(), r.trajectory, 1e-5);
  EXPECT_TRUE(rep.ok()) << rep.to_json();
}

TEST(Verify, RaisedApexIsTheOnlyViolation) {
  const PlanResult& r = solved();
  Trajectory traj = r.trajectory;
  traj.states[30].y += 0.01;
  const VerificationReport rep = verify_trajectory(spec_at(), traj, 1e-5);
  // Moving one height also breaks the neighbouring position defects.
  std::set<std::string> names;
  for (const auto& v : rep.violations) names.insert(v.name);
  EXPECT_EQ(std::count_if(rep.violations.begin(), rep.violations.end(),
                          [](const Violation& v) { return v.name == "jump_height"; }),
            1);
  EXPECT_EQ(names, (std::set<std::string>{"jump_height", "defect_y"}));

  // Against a target that moves with it, only the apex rule notices.
  ProblemSpec lifted = spec_at();
  lifted.jump_height += 0.01;
  const VerificationReport shifted = verify_trajectory(lifted, r.trajectory, 1e-5);
  ASSERT_EQ(shifted.violations.size(), 1u);
  EXPECT_EQ(shifted.violations[0].name, "jump_height");
  EXPECT_EQ(shifted.violations[0].index, 30);
  EXPECT_NEAR(shifted.violations[0].magnitude, 0.01, 1e-6);
}

TEST(Verify, FlippedResetIsReportedAtTheJunction) {
  const PlanResult& r = solved();
  const ProblemSpec spec = spec_at();
  const int k = spec.schedule.kickoff_index();
  Trajectory traj = r.trajectory;
  const double before = traj.states[k].phidot;
  ASSERT_GT(before, 0.0);
  traj.states[k + 1].phidot = spec.params.e * before;
  const VerificationReport rep = verify_trajectory(spec, traj, 1e-5);
  bool found = false;
  for (const auto& v : rep.violations) {
    if (v.name != "reset_phidot") continue;
    found = true;
    EXPECT_EQ(v.index, k);
    EXPECT_NEAR(v.magnitude, 2.0 * spec.params.e * std::abs(before), 1e-12);
  }
  EXPECT_TRUE(found);
}

TEST(Verify, DimensionMismatchIsStructural) {
  Trajectory traj = solved().trajectory;
  traj.durations.pop_back();
  EXPECT_THROW(verify_trajectory(spec_at(), traj, 1e-5), StructuralError);
}

TEST(Verify, JsonReportShape) {
  ProblemSpec lifted = spec_at();
  lifted.jump_height += 0.01;
  const auto doc = nlohmann::json::parse(verify_trajectory(lifted, solved().trajectory, 1e-5).to_json());
  ASSERT_TRUE(doc.is_array());
  ASSERT_EQ(doc.size(), 1u);
  EXPECT_EQ(doc[0]["name"], "jump_height");
  EXPECT_EQ(doc[0]["index"], 30);
  EXPECT_TRUE(doc[0]["magnitude"].is_number());
}

TEST(Verify, AgreesWithBuilderOnRandomVectors) {
  const ProblemSpec spec = spec_at();
  const ConstraintSet set = build_constraints(spec);
  const std::vector<double> base = initial_guess(spec);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> raw = base;
    const double rate = 0.02 + 0.5 * coin(rng);
    for (double& v : raw) {
      if (coin(rng) < rate) v += noise(rng) * std::max(0.1, std::abs(v));
    }
    const auto expected = builder_violations(set, raw, 1e-5);
    const auto got = verifier_violations(verify_trajectory(spec, decode(set.layout, raw), 1e-5));
    ASSERT_FALSE(expected.empty());
    EXPECT_EQ(got, expected) << "trial " << trial;
  }
}

TEST(Verify, SingleEntryPerturbationNamesATouchingConstraint) {
  const ProblemSpec spec = spec_at();
  const ConstraintSet set = build_constraints(spec);
  const std::vector<double>& x = solved().x;
  const double tol = 1e-5;
  std::vector<std::vector<const ConstraintRecord*>> touching(set.layout.total());
  for (const auto& r : set.records) {
    for (int v : r.vars) touching[v].push_back(&r);
  }
  int checked = 0;
  for (int v = 0; v < set.layout.total(); ++v) {
    // Only variables with a unit-or-steeper equality row can be caught.
    bool sensitive = false;
    for (const ConstraintRecord* r : touching[v]) {
      if (r->kind != RecordKind::kEquality) continue;
      std::vector<double> local(r->vars.size()), grad(r->vars.size());
      for (std::size_t a = 0; a < r->vars.size(); ++a) local[a] = x[r->vars[a]];
      r->gradient(local, grad);
      const auto pos = std::find(r->vars.begin(), r->vars.end(), v) - r->vars.begin();
      if (std::abs(grad[pos]) >= 1.0) sensitive = true;
    }
    if (!sensitive) continue;
    ++checked;
    std::vector<double> moved = x;
    moved[v] += 10.0 * tol;
    const VerificationReport rep = verify_trajectory(spec, decode(set.layout, moved), tol);
    std::set<Key> allowed;
    for (const ConstraintRecord* r : touching[v]) allowed.insert({r->name, r->index});
    const bool named = std::any_of(rep.violations.begin(), rep.violations.end(),
                                   [&](const Violation& viol) {
                                     return allowed.count({viol.name, viol.index}) > 0;
                                   });
    EXPECT_TRUE(named) << "variable " << v;
  }
  EXPECT_GT(checked, set.layout.total() / 2);
}

TEST(Energy, RestingTrajectoryIsConstant) {
  const ProblemSpec spec = spec_at();
  Trajectory traj;
  traj.states.assign(61, BoardState{});
  for (auto& s : traj.states) s.y = spec.params.d;
  traj.controls.assign(61, ControlSample{});
  traj.forces.assign(61, static_equilibrium_forces(spec.params));
  traj.durations.assign(60, 0.01);
  traj.update_time();
  const EnergyAudit audit = energy_audit(spec, traj);
  ASSERT_EQ(audit.energy.size(), 61u);
  for (double e : audit.energy) EXPECT_DOUBLE_EQ(e, audit.energy.front());
  EXPECT_EQ(audit.kickoff_loss(), 0.0);
}

TEST(Energy, RotationalTermScalesByESquared) {
  const ProblemSpec spec = spec_at();
  const int k = spec.schedule.kickoff_index();
  Trajectory traj = solved().trajectory;
  traj.states[k].phidot = 2.0;
  traj.states[k + 1].phidot = -1.6;
  const EnergyAudit audit = energy_audit(spec, traj);
  EXPECT_NEAR(audit.rotational_post / audit.rotational_pre, 0.64, 1e-14);
  EXPECT_GT(audit.kickoff_loss(), 0.0);
  EXPECT_LT(audit.relative_gain(), 0.0);
}

TEST(Energy, SolvedTrajectoryLosesEnergyAtKickoff) {
  EXPECT_LE(solved().energy.relative_gain(), 1e-8);
}

}  // namespace
}  // namespace ollie
