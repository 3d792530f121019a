#include "ollie/nlp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ollie/errors.hpp"

namespace ollie::nlp {

void NlpProblem::validate() const {
  if (num_variables < 0) throw StructuralError("negative variable count");
  if (static_cast<int>(lower.size()) != num_variables ||
      static_cast<int>(upper.size()) != num_variables) {
    throw StructuralError("bound vectors must match the variable count");
  }
  for (int i = 0; i < num_variables; ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i])) {
      throw StructuralError("NaN variable bound");
    }
  }
  auto check_pattern = [&](const std::vector<int>& vars, std::size_t id, const char* what) {
    for (int v : vars) {
      if (v < 0 || v >= num_variables) {
        std::ostringstream os;
        os << what << " " << id << " references variable " << v << " outside [0, "
           << num_variables << ")";
        throw StructuralError(os.str());
      }
    }
    std::vector<int> sorted = vars;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      std::ostringstream os;
      os << what << " " << id << " lists a variable twice";
      throw StructuralError(os.str());
    }
  };
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    check_pattern(constraints[j].vars, j, "constraint");
    if (!constraints[j].value) throw StructuralError("constraint without a value callback");
  }
  for (std::size_t j = 0; j < objective.size(); ++j) {
    check_pattern(objective[j].vars, j, "objective term");
    if (!objective[j].value) throw StructuralError("objective term without a value callback");
  }
}

int NlpProblem::num_equalities() const {
  return static_cast<int>(std::count_if(constraints.begin(), constraints.end(), [](const auto& c) {
    return c.kind == ConstraintKind::kEquality;
  }));
}

int NlpProblem::num_inequalities() const {
  return static_cast<int>(constraints.size()) - num_equalities();
}

}  // namespace ollie::nlp
