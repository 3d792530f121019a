#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ollie/dynamics.hpp"
#include "ollie/errors.hpp"

namespace ollie {
namespace {

constexpr double kPi = std::numbers::pi;

BoardState rest(const SystemParams& p) {
  BoardState s;
  s.y = p.d;
  return s;
}

TEST(DynamicsResidual, StaticBalanceIsZero) {
  const SystemParams p;
  const auto res = dynamics_residual(p, rest(p), {kPi / 2.0, 0.0, 0.0},
                                     {p.total_mass() * p.g / 2.0, p.total_mass() * p.g / 2.0});
  for (double r : res) EXPECT_NEAR(r, 0.0, 1e-10);
}

TEST(DynamicsResidual, AirborneUprightFreeFall) {
  const SystemParams p;
  BoardState s;
  s.y = 0.4;
  s.phi = 0.2;
  s.yddot = -p.g;
  const auto res = dynamics_residual(p, s, {0.2 + kPi / 2.0, 0.0, 0.0}, {0.0, 0.0});
  for (double r : res) EXPECT_NEAR(r, 0.0, 1e-12);
}

TEST(DynamicsResidual, MatchesFrozenTermByTermValues) {
  const SystemParams p;
  BoardState s;
  s.y = 0.2;
  s.phi = 0.3;
  s.xdot = 0.1;
  s.ydot = 0.5;
  s.phidot = 1.0;
  const auto res = dynamics_residual(p, s, {1.0, 2.0, 3.0}, {0.0, 0.0});
  // 30-digit evaluation of the three balances.
  const double expected[] = {11.464354808239636746, 693.71381271711704046,
                             -277.71693880683046913};
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(res[k], expected[k], 1e-10 * std::abs(expected[k])) << k;
  }
}

TEST(DynamicsResidual, RejectsNonFiniteInput) {
  const SystemParams p;
  BoardState s = rest(p);
  s.ydot = std::nan("");
  EXPECT_THROW(dynamics_residual(p, s, {}, {}), InvalidInputError);
  EXPECT_THROW(dynamics_residual(p, rest(p), {kPi / 2, 0, INFINITY}, {}), InvalidInputError);
}

TEST(DynamicsResidual, LinearInAccelerationsAndReactions) {
  const SystemParams p;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    BoardState base;
    base.y = 0.2 + 0.1 * u(rng);
    base.phi = 0.2 * u(rng);
    base.xdot = u(rng);
    base.ydot = u(rng);
    base.phidot = u(rng);
    const ControlSample c{1.5 + 0.3 * u(rng), u(rng), u(rng)};
    auto eval = [&](const std::array<double, 5>& v) {
      BoardState s = base;
      s.xddot = v[0];
      s.yddot = v[1];
      s.phiddot = v[2];
      return dynamics_residual(p, s, c, {v[3], v[4]});
    };
    std::array<double, 5> a, b, mix, zero{};
    for (int k = 0; k < 5; ++k) {
      a[k] = 100.0 * u(rng);
      b[k] = 100.0 * u(rng);
    }
    const double alpha = u(rng), beta = u(rng);
    for (int k = 0; k < 5; ++k) mix[k] = alpha * a[k] + beta * b[k];
    const auto r0 = eval(zero), ra = eval(a), rb = eval(b), rm = eval(mix);
    for (int k = 0; k < 3; ++k) {
      // Affine map: r(mix) - r0 = alpha (r(a) - r0) + beta (r(b) - r0).
      const double lhs = rm[k] - r0[k];
      const double rhs = alpha * (ra[k] - r0[k]) + beta * (rb[k] - r0[k]);
      EXPECT_NEAR(lhs, rhs, 1e-12 * std::max({1.0, std::abs(lhs), std::abs(ra[k]), std::abs(rb[k])}))
          << "trial " << trial << " row " << k;
    }
  }
}

TEST(DynamicsResidual, ReactionStructure) {
  const SystemParams p;
  BoardState s;
  s.y = 0.25;
  s.phi = 0.4;
  s.phidot = -1.2;
  const ControlSample c{1.2, 0.7, -4.0};
  const auto base = dynamics_residual(p, s, c, {100.0, 200.0});
  // Same sum, different split.
  const auto same_sum = dynamics_residual(p, s, c, {250.0, 50.0});
  // Same difference, different sum.
  const auto same_diff = dynamics_residual(p, s, c, {300.0, 400.0});
  EXPECT_EQ(base[0], same_sum[0]);
  EXPECT_EQ(base[0], same_diff[0]);
  EXPECT_NEAR(base[1], same_sum[1], 1e-12);
  EXPECT_NEAR(base[2], same_diff[2], 1e-12);
  EXPECT_GT(std::abs(base[1] - same_diff[1]), 1.0);
  EXPECT_GT(std::abs(base[2] - same_sum[2]), 1.0);
}

TEST(DynamicsResidual, FreeFallOnlyAtGravity) {
  const SystemParams p;
  const ControlSample c{0.1 + kPi / 2.0, 0.0, 0.0};
  BoardState s;
  s.y = 0.5;
  s.phi = 0.1;
  s.yddot = -p.g;
  for (double r : dynamics_residual(p, s, c, {})) EXPECT_NEAR(r, 0.0, 1e-12);
  for (int k = 0; k < 3; ++k) {
    BoardState t = s;
    (k == 0 ? t.xddot : k == 1 ? t.yddot : t.phiddot) += 0.01;
    const auto r = dynamics_residual(p, t, c, {});
    EXPECT_GT(std::abs(r[0]) + std::abs(r[1]) + std::abs(r[2]), 1e-3) << k;
  }
}

TEST(StaticEquilibrium, Examples) {
  const SystemParams p;
  const ReactionForces f = static_equilibrium_forces(p);
  EXPECT_NEAR(f.R1, 343.35, 1e-10);
  EXPECT_NEAR(f.R2, 343.35, 1e-10);

  SystemParams massless;
  massless.m_r = 0.0;
  massless.m_b = 0.0;
  EXPECT_EQ(static_equilibrium_forces(massless), (ReactionForces{0.0, 0.0}));

  SystemParams unit;
  unit.m_r = 1.0;
  unit.m_b = 0.0;
  unit.g = 10.0;
  EXPECT_EQ(static_equilibrium_forces(unit), (ReactionForces{5.0, 5.0}));
}

TEST(PivotHeight, RearExamples) {
  const SystemParams p;
  EXPECT_NEAR(rear_pivot_height(p, 0.0), 0.10, 1e-15);
  EXPECT_NEAR(rear_pivot_height(p, kPi / 2.0), 0.2775, 1e-15);
  EXPECT_NEAR(rear_pivot_height(p, 0.3), 0.1706419471269413302, 1e-15);
  EXPECT_THROW(rear_pivot_height(p, -0.01), DomainError);
  EXPECT_THROW(rear_pivot_height(p, 1.6), DomainError);
}

TEST(PivotHeight, FrontExamples) {
  const SystemParams p;
  EXPECT_NEAR(front_pivot_height(p, 0.0), 0.10, 1e-15);
  EXPECT_NEAR(front_pivot_height(p, -0.3), 0.1706419471269413302, 1e-15);
  EXPECT_NEAR(front_pivot_height(p, -kPi / 2.0), 0.2775, 1e-15);
  EXPECT_THROW(front_pivot_height(p, 0.01), DomainError);
}

TEST(PivotHeight, MirrorIdentity) {
  const SystemParams p;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, kPi / 2.0);
  for (int i = 0; i < 100; ++i) {
    const double phi = u(rng);
    EXPECT_NEAR(front_pivot_height(p, -phi), rear_pivot_height(p, phi), 1e-14);
  }
}

TEST(KickoffAngle, TableValue) {
  const SystemParams p;
  const double phi = kickoff_angle(p);
  EXPECT_NEAR(phi, 0.58264918413785958389, 1e-10);
  EXPECT_NEAR(phi, 0.5825, 5e-4);
}

TEST(KickoffAngle, ClosedForms) {
  SystemParams no_wheel;
  no_wheel.r = 0.0;
  EXPECT_NEAR(kickoff_angle(no_wheel), std::atan(0.1 / 0.16), 1e-10);
  EXPECT_NEAR(kickoff_angle(no_wheel), 0.55860, 5e-6);

  SystemParams flush;
  flush.d = flush.r;
  EXPECT_NEAR(kickoff_angle(flush), std::asin(0.0275 / 0.16), 1e-10);
  EXPECT_NEAR(kickoff_angle(flush), 0.17273, 5e-6);
}

TEST(KickoffAngle, NoRootIsAnError) {
  SystemParams p;
  p.w = 0.02;  // shorter than the wheel radius
  EXPECT_THROW(kickoff_angle(p), NoKickoffGeometryError);
}

TEST(KickoffAngle, SatisfiesStrikeConditionOnRandomGeometry) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 200) {
    SystemParams p;
    p.r = 0.01 + 0.04 * u(rng);
    p.d = p.r + 0.01 + 0.15 * u(rng);
    p.w = 0.05 + 0.3 * u(rng);
    double phi;
    try {
      phi = kickoff_angle(p);
    } catch (const NoKickoffGeometryError&) {
      continue;
    }
    ++checked;
    EXPECT_LT(std::abs(p.r + (p.d - p.r) * std::cos(phi) - p.w * std::sin(phi)), 1e-9);
    EXPECT_GT(phi, 0.0);
    EXPECT_LT(phi, kPi / 2.0);
  }
}

TEST(KickoffReset, Examples) {
  SystemParams p;
  BoardState s;
  s.phidot = 2.0;
  EXPECT_DOUBLE_EQ(apply_kickoff_reset(p, s).phidot, -1.6);
  s.phidot = 0.0;
  EXPECT_EQ(apply_kickoff_reset(p, s).phidot, 0.0);
  p.e = 0.0;
  s.phidot = 5.0;
  EXPECT_EQ(apply_kickoff_reset(p, s).phidot, 0.0);
}

TEST(KickoffReset, OnlyPitchRateChangesAndTwiceScalesByESquared) {
  const SystemParams p;
  BoardState s{0.1, 0.2, 0.5, -0.3, 1.1, 2.5, 0.7, -9.0, 4.0};
  const BoardState once = apply_kickoff_reset(p, s);
  BoardState expected = s;
  expected.phidot = -p.e * s.phidot;
  EXPECT_EQ(once, expected);
  EXPECT_LE(std::abs(once.phidot), std::abs(s.phidot));
  EXPECT_NEAR(apply_kickoff_reset(p, once).phidot, p.e * p.e * s.phidot, 1e-15);
}

TEST(SystemParams, ValidationAndWarnings) {
  SystemParams p;
  EXPECT_TRUE(p.validate().empty());
  p.m_b = 20.0;
  EXPECT_EQ(p.validate().size(), 1u);
  p = {};
  p.e = 1.0;
  EXPECT_THROW(p.validate(), InvalidInputError);
  p = {};
  p.d = p.r;
  EXPECT_THROW(p.validate(), InvalidInputError);
  p = {};
  p.L = -1.0;
  EXPECT_THROW(p.validate(), InvalidInputError);
}

}  // namespace
}  // namespace ollie
