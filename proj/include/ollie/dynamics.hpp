#pragma once

// Planar board-rider model: a rigid board carrying a point-mass rider on a
// massless rod of length H whose angle theta (relative to the board) is the
// control input.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace ollie {

struct SystemParams {
  double m_r = 65.0;   // rider mass [kg]
  double m_b = 5.0;    // board mass [kg]
  double L = 0.50;     // wheelbase [m]
  double w = 0.16;     // tail / nose overhang [m]
  double H = 0.85;     // rider lever arm from board COM [m]
  double d = 0.10;     // board COM rest height [m]
  double r = 0.0275;   // wheel radius [m]
  double e = 0.80;     // coefficient of restitution
  double g = 9.81;     // gravity [m/s^2]

  /// Throws InvalidInputError on a violated invariant. Returns non-fatal
  /// warnings (e.g. a rider that is not much heavier than the board).
  std::vector<std::string> validate() const;

  double total_mass() const { return m_r + m_b; }
  /// Pitch inertia of the board alone about its COM.
  double board_inertia() const { return m_b * (L + 2.0 * w) * (L + 2.0 * w) / 12.0; }
  /// Pitch inertia coefficient multiplying phi_ddot in the moment balance.
  double pitch_inertia() const { return board_inertia() + m_r * H * H / 2.0; }
};

struct BoardState {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;
  double xdot = 0.0;
  double ydot = 0.0;
  double phidot = 0.0;
  double xddot = 0.0;
  double yddot = 0.0;
  double phiddot = 0.0;

  bool operator==(const BoardState&) const = default;
};

struct ControlSample {
  double theta = std::numbers::pi / 2.0;
  double theta_dot = 0.0;
  double theta_ddot = 0.0;

  bool operator==(const ControlSample&) const = default;
};

struct ReactionForces {
  double R1 = 0.0;  // front wheel
  double R2 = 0.0;  // back wheel

  bool operator==(const ReactionForces&) const = default;
};

/// Residuals of the horizontal force, vertical force and pitch moment
/// balances [N, N, N*m], written as (lhs - rhs).
///
/// Scalar-generic so the transcription layer can push dual numbers through
/// the same expressions. Arguments follow the board's generalized
/// coordinates, then the control, then the wheel reactions.
template <typename Scalar>
std::array<Scalar, 3> equations_of_motion(const SystemParams& p, const Scalar& phi,
                                          const Scalar& phidot, const Scalar& xddot,
                                          const Scalar& yddot, const Scalar& phiddot,
                                          const Scalar& theta, const Scalar& theta_dot,
                                          const Scalar& theta_ddot, const Scalar& R1,
                                          const Scalar& R2) {
  using std::cos;
  using std::sin;
  const double M = p.m_r + p.m_b;
  const Scalar rel = theta - phi;
  const Scalar rel_dot = theta_dot - phidot;
  const Scalar rel_ddot = theta_ddot - phiddot;
  const Scalar s = sin(rel);
  const Scalar c = cos(rel);

  // The translational coupling coefficient is m_b * H, kept as the model
  // states it.
  const Scalar fx = M * xddot + p.m_b * p.H * (rel_ddot * s + rel_dot * rel_dot * c);
  const Scalar fy = M * yddot - (R1 + R2 - M * p.g +
                                 p.m_b * p.H * (rel_dot * rel_dot * s - rel_ddot * c));
  const Scalar mz = p.pitch_inertia() * phiddot -
                    (0.5 * p.L * (R1 - R2) + 0.5 * p.m_r * p.H * (p.g * c + p.H * theta_ddot));
  return {fx, fy, mz};
}

/// Throws InvalidInputError if any field is not finite.
std::array<double, 3> dynamics_residual(const SystemParams& p, const BoardState& s,
                                        const ControlSample& c, const ReactionForces& f);

/// Both wheels share the total weight.
ReactionForces static_equilibrium_forces(const SystemParams& p);

template <typename Scalar>
Scalar rear_pivot_height_unchecked(const SystemParams& p, const Scalar& phi) {
  using std::cos;
  using std::sin;
  return p.r + (p.d - p.r) * cos(phi) + 0.5 * p.L * sin(phi);
}

template <typename Scalar>
Scalar front_pivot_height_unchecked(const SystemParams& p, const Scalar& phi) {
  using std::cos;
  using std::sin;
  return p.r + (p.d - p.r) * cos(phi) - 0.5 * p.L * sin(phi);
}

/// Tail clearance above the ground while pivoting on the back axle.
/// Positive before the tail strike, zero at it.
template <typename Scalar>
Scalar tail_clearance(const SystemParams& p, const Scalar& phi) {
  using std::cos;
  using std::sin;
  return p.r + (p.d - p.r) * cos(phi) - p.w * sin(phi);
}

/// COM height while pivoting on the back axle; phi in [0, pi/2].
double rear_pivot_height(const SystemParams& p, double phi);

/// COM height while pivoting on the front axle; phi in [-pi/2, 0].
double front_pivot_height(const SystemParams& p, double phi);

/// Smallest pitch in (0, pi/2) at which the tail touches the ground,
/// found by bisection to 1e-10 rad.
double kickoff_angle(const SystemParams& p);

/// Tail-strike reset: only the pitch rate changes, phidot <- -e * phidot.
BoardState apply_kickoff_reset(const SystemParams& p, const BoardState& s);

}  // namespace ollie
