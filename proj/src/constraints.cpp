#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ollie/dual.hpp"
#include "ollie/errors.hpp"
#include "ollie/transcription.hpp"

namespace ollie {

namespace {

using S = DecisionLayout;

/// Wraps a scalar-generic expression `fn(const T* v)` over the record's
/// local values into value and dual-number gradient callbacks.
template <typename Fn>
ConstraintRecord make_record(std::string name, int index, RecordKind kind, std::vector<int> vars,
                             Fn fn, bool linear = false) {
  ConstraintRecord rec;
  rec.name = std::move(name);
  rec.index = index;
  rec.kind = kind;
  rec.linear = linear;
  const std::size_t k = vars.size();
  rec.vars = std::move(vars);
  rec.value = [fn](std::span<const double> v) { return fn(v.data()); };
  rec.gradient = [fn, k](std::span<const double> v, std::span<double> out) {
    std::array<Dual, kMaxLocalVars> dv;
    for (std::size_t a = 0; a < k; ++a) dv[a] = Dual::variable(v[a], a);
    const Dual r = fn(dv.data());
    for (std::size_t a = 0; a < k; ++a) out[a] = r.d[a];
  };
  return rec;
}

ConstraintRecord fix_slot(std::string name, int index, int var, double target) {
  ConstraintRecord rec = make_record(
      std::move(name), index, RecordKind::kEquality, {var},
      [target](const auto* v) { return v[0] - target; }, true);
  rec.rhs = target;
  return rec;
}

ConstraintRecord bound_slot(std::string name, int index, int var, double lower, double upper) {
  ConstraintRecord rec = make_record(
      std::move(name), index, RecordKind::kBound, {var}, [](const auto* v) { return v[0]; },
      true);
  rec.lower = lower;
  rec.upper = upper;
  return rec;
}

/// next - current - h * rate
ConstraintRecord defect(std::string name, int index, int current, int next, int rate, int h) {
  return make_record(std::move(name), index, RecordKind::kEquality, {current, next, rate, h},
                     [](const auto* v) { return v[1] - v[0] - v[3] * v[2]; });
}

}  // namespace

void ProblemSpec::validate() const {
  try {
    params.validate();
    schedule.validate();
  } catch (const Error& ex) {
    throw BuildError(ex.what());
  }
  if (!(jump_height > params.d)) throw BuildError("jump_height must exceed the rest height d");
  if (!(h_min > 0.0)) throw BuildError("h_min must be positive");
  if (!(h_min <= h_max)) throw BuildError("h_min must not exceed h_max");
  if (!(u_ddot_max > 0.0)) throw BuildError("u_ddot_max must be positive");
  if (!(regularization_weight >= 0.0)) throw BuildError("regularization_weight must be >= 0");
  if (!std::isfinite(jump_height) || !std::isfinite(h_max) || !std::isfinite(u_ddot_max)) {
    throw BuildError("problem parameters must be finite");
  }
}

double ConstraintRecord::violation(std::span<const double> raw) const {
  std::vector<double> local(vars.size());
  for (std::size_t k = 0; k < vars.size(); ++k) local[k] = raw[vars[k]];
  const double v = value(local);
  switch (kind) {
    case RecordKind::kEquality: return std::abs(v);
    case RecordKind::kInequality: return std::max(0.0, -v);
    case RecordKind::kBound: return std::max({0.0, lower - v, v - upper});
  }
  return 0.0;
}

ConstraintSet build_constraints(const ProblemSpec& spec) {
  spec.validate();
  const SystemParams p = spec.params;
  const PhaseSchedule& sched = spec.schedule;
  const int T = sched.T;
  const int k = sched.kickoff_index();
  const int mid = sched.midpoint();

  ConstraintSet set;
  set.layout.T = T;
  const DecisionLayout& L = set.layout;
  auto& out = set.records;
  out.reserve(constraint_census(sched).total());
  auto at = [&](int i, S::Slot s) { return L.at(i, s); };

  for (int i = 0; i <= T; ++i) {
    out.push_back(make_record(
        "dynamics_x", i, RecordKind::kEquality,
        {at(i, S::kPhi), at(i, S::kPhidot), at(i, S::kXddot), at(i, S::kPhiddot),
         at(i, S::kTheta), at(i, S::kThetadot), at(i, S::kThetaddot)},
        [p](const auto* v) {
          using T_ = std::decay_t<decltype(v[0])>;
          const T_ zero(0.0);
          return equations_of_motion<T_>(p, v[0], v[1], v[2], zero, v[3], v[4], v[5], v[6],
                                         zero, zero)[0];
        }));
    out.push_back(make_record(
        "dynamics_y", i, RecordKind::kEquality,
        {at(i, S::kPhi), at(i, S::kPhidot), at(i, S::kYddot), at(i, S::kPhiddot),
         at(i, S::kTheta), at(i, S::kThetadot), at(i, S::kThetaddot), at(i, S::kR1),
         at(i, S::kR2)},
        [p](const auto* v) {
          using T_ = std::decay_t<decltype(v[0])>;
          const T_ zero(0.0);
          return equations_of_motion<T_>(p, v[0], v[1], zero, v[2], v[3], v[4], v[5], v[6],
                                         v[7], v[8])[1];
        }));
    out.push_back(make_record(
        "dynamics_phi", i, RecordKind::kEquality,
        {at(i, S::kPhi), at(i, S::kPhiddot), at(i, S::kTheta), at(i, S::kThetaddot),
         at(i, S::kR1), at(i, S::kR2)},
        [p](const auto* v) {
          using T_ = std::decay_t<decltype(v[0])>;
          const T_ zero(0.0);
          return equations_of_motion<T_>(p, v[0], zero, zero, zero, v[1], v[2], zero, v[3],
                                         v[4], v[5])[2];
        }));
  }

  // Semi-implicit Euler: positions move with the next velocity, velocities
  // with the current acceleration.
  for (int i = 0; i < T; ++i) {
    const int h = L.h(i);
    out.push_back(defect("defect_x", i, at(i, S::kX), at(i + 1, S::kX), at(i + 1, S::kXdot), h));
    out.push_back(defect("defect_y", i, at(i, S::kY), at(i + 1, S::kY), at(i + 1, S::kYdot), h));
    out.push_back(
        defect("defect_phi", i, at(i, S::kPhi), at(i + 1, S::kPhi), at(i + 1, S::kPhidot), h));
    out.push_back(defect("defect_theta", i, at(i, S::kTheta), at(i + 1, S::kTheta),
                         at(i + 1, S::kThetadot), h));
    out.push_back(
        defect("defect_xdot", i, at(i, S::kXdot), at(i + 1, S::kXdot), at(i, S::kXddot), h));
    out.push_back(
        defect("defect_ydot", i, at(i, S::kYdot), at(i + 1, S::kYdot), at(i, S::kYddot), h));
    if (i != k) {
      out.push_back(defect("defect_phidot", i, at(i, S::kPhidot), at(i + 1, S::kPhidot),
                           at(i, S::kPhiddot), h));
    }
    out.push_back(defect("defect_thetadot", i, at(i, S::kThetadot), at(i + 1, S::kThetadot),
                         at(i, S::kThetaddot), h));
  }

  // Tail strike: the pitch rate reverses and loses a factor e.
  out.push_back(make_record(
      "reset_phidot", k, RecordKind::kEquality, {at(k, S::kPhidot), at(k + 1, S::kPhidot)},
      [e = p.e](const auto* v) { return v[1] + e * v[0]; }, true));

  for (int i = 0; i <= T; ++i) {
    out.push_back(bound_slot("theta_bounds", i, at(i, S::kTheta), 0.0, std::numbers::pi));
    out.push_back(bound_slot("thetaddot_bounds", i, at(i, S::kThetaddot), -spec.u_ddot_max,
                             spec.u_ddot_max));
    out.push_back(bound_slot("R1_nonneg", i, at(i, S::kR1), 0.0, nlp::kInf));
    out.push_back(bound_slot("R2_nonneg", i, at(i, S::kR2), 0.0, nlp::kInf));
    if (i < T) out.push_back(bound_slot("h_bounds", i, L.h(i), spec.h_min, spec.h_max));
  }

  for (int i = 0; i <= T; ++i) {
    const int section = sched.section_of(i);
    const int y = at(i, S::kY);
    const int phi = at(i, S::kPhi);
    switch (section) {
      case 1:
        out.push_back(fix_slot("s1_height", i, y, p.d));
        out.push_back(fix_slot("s1_pitch", i, phi, 0.0));
        out.push_back(fix_slot("s1_pitch_rate", i, at(i, S::kPhidot), 0.0));
        break;
      case 2:
        out.push_back(fix_slot("s2_front_unloaded", i, at(i, S::kR1), 0.0));
        out.push_back(make_record("s2_rear_pivot", i, RecordKind::kEquality, {y, phi},
                                  [p](const auto* v) {
                                    return v[0] - rear_pivot_height_unchecked(p, v[1]);
                                  }));
        out.push_back(bound_slot("s2_pitch_nonneg", i, phi, 0.0, nlp::kInf));
        if (i < k) {
          out.push_back(make_record("s2_tail_clearance", i, RecordKind::kInequality, {phi},
                                    [p](const auto* v) { return tail_clearance(p, v[0]); }));
          out.push_back(make_record(
              "s2_pitch_monotone", i, RecordKind::kInequality, {phi, at(i + 1, S::kPhi)},
              [](const auto* v) { return v[1] - v[0]; }, true));
        } else {
          out.push_back(make_record("s2_kickoff", i, RecordKind::kEquality, {phi},
                                    [p](const auto* v) { return tail_clearance(p, v[0]); }));
        }
        break;
      case 3:
        out.push_back(fix_slot("s3_front_airborne", i, at(i, S::kR1), 0.0));
        out.push_back(fix_slot("s3_rear_airborne", i, at(i, S::kR2), 0.0));
        if (i == mid) {
          ConstraintRecord rec = make_record(
              "jump_height", i, RecordKind::kEquality, {y},
              [target = spec.jump_height](const auto* v) { return v[0] - target; }, true);
          rec.rhs = spec.jump_height;
          out.push_back(std::move(rec));
        }
        break;
      case 4:
        out.push_back(fix_slot("s4_rear_unloaded", i, at(i, S::kR2), 0.0));
        out.push_back(make_record("s4_front_pivot", i, RecordKind::kEquality, {y, phi},
                                  [p](const auto* v) {
                                    return v[0] - front_pivot_height_unchecked(p, v[1]);
                                  }));
        out.push_back(bound_slot("s4_pitch_nonpos", i, phi, -nlp::kInf, 0.0));
        if (i + 1 < sched.section_end(4)) {
          out.push_back(make_record(
              "s4_pitch_monotone", i, RecordKind::kInequality, {phi, at(i + 1, S::kPhi)},
              [](const auto* v) { return v[1] - v[0]; }, true));
        }
        break;
      default:
        out.push_back(fix_slot("s5_height", i, y, p.d));
        out.push_back(fix_slot("s5_pitch", i, phi, 0.0));
        break;
    }
  }

  const double upright = std::numbers::pi / 2.0;
  out.push_back(fix_slot("initial_theta", 0, at(0, S::kTheta), upright));
  out.push_back(fix_slot("final_theta", T, at(T, S::kTheta), upright));
  out.push_back(fix_slot("initial_xdot", 0, at(0, S::kXdot), 0.0));
  out.push_back(fix_slot("initial_ydot", 0, at(0, S::kYdot), 0.0));
  out.push_back(fix_slot("initial_phidot", 0, at(0, S::kPhidot), 0.0));
  out.push_back(fix_slot("initial_thetadot", 0, at(0, S::kThetadot), 0.0));
  out.push_back(fix_slot("final_xdot", T, at(T, S::kXdot), 0.0));
  out.push_back(fix_slot("final_ydot", T, at(T, S::kYdot), 0.0));
  out.push_back(fix_slot("final_phidot", T, at(T, S::kPhidot), 0.0));
  out.push_back(fix_slot("final_thetadot", T, at(T, S::kThetadot), 0.0));
  out.push_back(make_record(
      "initial_balance", 0, RecordKind::kEquality, {at(0, S::kR1), at(0, S::kR2)},
      [](const auto* v) { return v[0] - v[1]; }, true));
  out.push_back(fix_slot("gauge_x", 0, at(0, S::kX), 0.0));
  return set;
}

ConstraintCensus constraint_census(const PhaseSchedule& schedule) {
  const int T = schedule.T;
  const int n1 = schedule.section_size(1);
  const int n2 = schedule.section_size(2);
  const int n3 = schedule.section_size(3);
  const int n4 = schedule.section_size(4);
  const int n5 = schedule.section_size(5);
  ConstraintCensus c;
  // dynamics, defects (one replaced by the reset), reset, per-section rules,
  // kickoff and jump height, boundary conditions.
  c.equalities = 3 * (T + 1) + (8 * T - 1) + 1 + 3 * n1 + 2 * n2 + 1 + 2 * n3 + 1 + 2 * n4 +
                 2 * n5 + 12;
  c.inequalities = 2 * (n2 - 1) + (n4 - 1);
  c.bounds = 4 * (T + 1) + T + n2 + n4;
  return c;
}

nlp::NlpProblem to_nlp(const ConstraintSet& set, const ProblemSpec& spec) {
  nlp::NlpProblem problem;
  problem.num_variables = set.layout.total();
  problem.lower.assign(problem.num_variables, -nlp::kInf);
  problem.upper.assign(problem.num_variables, nlp::kInf);
  for (const auto& rec : set.records) {
    if (rec.kind == RecordKind::kBound) {
      const int v = rec.vars[0];
      problem.lower[v] = std::max(problem.lower[v], rec.lower);
      problem.upper[v] = std::min(problem.upper[v], rec.upper);
      continue;
    }
    nlp::Constraint c;
    c.kind = rec.kind == RecordKind::kEquality ? nlp::ConstraintKind::kEquality
                                                 : nlp::ConstraintKind::kInequality;
    c.vars = rec.vars;
    c.value = rec.value;
    c.gradient = rec.gradient;
    c.linear = rec.linear;
    c.label = rec.name + "[" + std::to_string(rec.index) + "]";
    problem.constraints.push_back(std::move(c));
  }
  if (spec.regularization_weight > 0.0) {
    const double weight = spec.regularization_weight;
    for (int i = 0; i < set.layout.T; ++i) {
      nlp::ObjectiveTerm term;
      term.vars = {set.layout.at(i, S::kThetaddot), set.layout.h(i)};
      term.value = [weight](std::span<const double> v) { return weight * v[0] * v[0] * v[1]; };
      term.gradient = [weight](std::span<const double> v, std::span<double> g) {
        g[0] = 2.0 * weight * v[0] * v[1];
        g[1] = weight * v[0] * v[0];
      };
      problem.objective.push_back(std::move(term));
    }
  }
  return problem;
}

}  // namespace ollie
