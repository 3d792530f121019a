#include "ollie/dynamics.hpp"

#include <sstream>

#include "ollie/errors.hpp"

namespace ollie {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw InvalidInputError(std::string("non-finite value for ") + name);
  }
}

}  // namespace

std::vector<std::string> SystemParams::validate() const {
  const std::pair<const char*, double> positive[] = {
      {"m_r", m_r}, {"m_b", m_b}, {"L", L}, {"w", w},
      {"H", H},     {"d", d},     {"r", r}, {"g", g}};
  for (const auto& [name, value] : positive) {
    require_finite(value, name);
    if (!(value > 0.0)) {
      throw InvalidInputError(std::string(name) + " must be strictly positive");
    }
  }
  require_finite(e, "e");
  if (!(d > r)) throw InvalidInputError("d must exceed the wheel radius r");
  if (!(e >= 0.0 && e < 1.0)) throw InvalidInputError("e must lie in [0, 1)");

  std::vector<std::string> warnings;
  if (m_r / m_b < 5.0) {
    std::ostringstream os;
    os << "rider-to-board mass ratio " << m_r / m_b << " is below 5";
    warnings.push_back(os.str());
  }
  return warnings;
}

std::array<double, 3> dynamics_residual(const SystemParams& p, const BoardState& s,
                                        const ControlSample& c, const ReactionForces& f) {
  const double values[] = {s.x,     s.y,      s.phi,    s.xdot,      s.ydot,
                           s.phidot, s.xddot, s.yddot,  s.phiddot,   c.theta,
                           c.theta_dot, c.theta_ddot, f.R1, f.R2, p.m_r,
                           p.m_b,   p.L,      p.w,      p.H,         p.g};
  for (double v : values) require_finite(v, "dynamics argument");
  return equations_of_motion<double>(p, s.phi, s.phidot, s.xddot, s.yddot, s.phiddot,
                                     c.theta, c.theta_dot, c.theta_ddot, f.R1, f.R2);
}

ReactionForces static_equilibrium_forces(const SystemParams& p) {
  require_finite(p.m_r, "m_r");
  require_finite(p.m_b, "m_b");
  require_finite(p.g, "g");
  if (p.m_r < 0.0 || p.m_b < 0.0) throw InvalidInputError("masses must be non-negative");
  const double half = 0.5 * (p.m_r + p.m_b) * p.g;
  return {half, half};
}

double rear_pivot_height(const SystemParams& p, double phi) {
  if (!(phi >= 0.0 && phi <= std::numbers::pi / 2.0)) {
    throw DomainError("rear pivot requires phi in [0, pi/2]");
  }
  return rear_pivot_height_unchecked(p, phi);
}

double front_pivot_height(const SystemParams& p, double phi) {
  if (!(phi >= -std::numbers::pi / 2.0 && phi <= 0.0)) {
    throw DomainError("front pivot requires phi in [-pi/2, 0]");
  }
  return front_pivot_height_unchecked(p, phi);
}

double kickoff_angle(const SystemParams& p) {
  double lo = 1e-6;
  double hi = std::numbers::pi / 2.0 - 1e-6;
  double f_lo = tail_clearance(p, lo);
  const double f_hi = tail_clearance(p, hi);
  if (!std::isfinite(f_lo) || !std::isfinite(f_hi) || f_lo * f_hi > 0.0) {
    throw NoKickoffGeometryError("tail never reaches the ground for phi in (0, pi/2)");
  }
  // Clearance falls monotonically when d >= r, so the bracket holds one root.
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = tail_clearance(p, mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

BoardState apply_kickoff_reset(const SystemParams& p, const BoardState& s) {
  BoardState out = s;
  out.phidot = -p.e * s.phidot;
  return out;
}

}  // namespace ollie
