#pragma once

// Minimal forward-mode dual number with a fixed-capacity gradient, enough for
// the small local stencils of the transcription constraints.

#include <array>
#include <cmath>
#include <cstddef>

namespace ollie {

inline constexpr std::size_t kMaxLocalVars = 16;

struct Dual {
  double v = 0.0;
  std::array<double, kMaxLocalVars> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit promotion from constants

  static Dual variable(double value, std::size_t slot) {
    Dual out(value);
    out.d[slot] = 1.0;
    return out;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t k = 0; k < kMaxLocalVars; ++k) d[k] += o.d[k];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t k = 0; k < kMaxLocalVars; ++k) d[k] -= o.d[k];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t k = 0; k < kMaxLocalVars; ++k) d[k] = d[k] * o.v + v * o.d[k];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    for (std::size_t k = 0; k < kMaxLocalVars; ++k) d[k] = (d[k] - v * inv * o.d[k]) * inv;
    v *= inv;
    return *this;
  }
};

inline Dual operator-(Dual a) {
  a.v = -a.v;
  for (auto& x : a.d) x = -x;
  return a;
}
inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator+(Dual a, double b) { a.v += b; return a; }
inline Dual operator+(double a, Dual b) { b.v += a; return b; }
inline Dual operator-(Dual a, double b) { a.v -= b; return a; }
inline Dual operator-(double a, const Dual& b) { return Dual(a) - b; }
inline Dual operator*(Dual a, double b) {
  a.v *= b;
  for (auto& x : a.d) x *= b;
  return a;
}
inline Dual operator*(double a, Dual b) { return b * a; }
inline Dual operator/(Dual a, double b) { return a * (1.0 / b); }

inline Dual sin(const Dual& a) {
  Dual out(std::sin(a.v));
  const double c = std::cos(a.v);
  for (std::size_t k = 0; k < kMaxLocalVars; ++k) out.d[k] = c * a.d[k];
  return out;
}

inline Dual cos(const Dual& a) {
  Dual out(std::cos(a.v));
  const double s = -std::sin(a.v);
  for (std::size_t k = 0; k < kMaxLocalVars; ++k) out.d[k] = s * a.d[k];
  return out;
}

}  // namespace ollie
