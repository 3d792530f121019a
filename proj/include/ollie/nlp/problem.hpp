#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ollie::nlp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ConstraintKind { kEquality, kInequality };  // c(x) = 0 or c(x) >= 0

/// Callbacks receive the values of `vars` gathered in order, never the full
/// point, so a constraint cannot depend on anything outside its pattern.
using LocalValue = std::function<double(std::span<const double>)>;
using LocalGradient = std::function<void(std::span<const double>, std::span<double>)>;

struct Constraint {
  ConstraintKind kind = ConstraintKind::kEquality;
  std::vector<int> vars;
  LocalValue value;
  LocalGradient gradient;  // optional; central differences when empty
  bool linear = false;     // affine in its variables
  std::string label;
};

/// One additive piece of the objective.
struct ObjectiveTerm {
  std::vector<int> vars;
  LocalValue value;
  LocalGradient gradient;  // optional
};

struct NlpProblem {
  int num_variables = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<Constraint> constraints;
  std::vector<ObjectiveTerm> objective;

  /// Throws StructuralError on out-of-range patterns, missing callbacks or
  /// mismatched bound vectors.
  void validate() const;
  int num_equalities() const;
  int num_inequalities() const;
};

}  // namespace ollie::nlp
