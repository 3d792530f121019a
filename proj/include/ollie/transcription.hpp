#pragma once

// Direct transcription of the five-section ollie: decision layout, the
// constraint records of the feasibility program, and the initial guess.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ollie/dynamics.hpp"
#include "ollie/nlp/problem.hpp"

namespace ollie {

/// Contact sections over timestep indices 0..T:
///   1 flat, 2 back wheel only, 3 airborne, 4 front wheel only, 5 flat.
/// Section s covers [start[s-1], start[s]); section 5 also owns index T.
struct PhaseSchedule {
  int T = 0;
  std::array<int, 6> start{};  // start[5] == T

  int section_begin(int s) const { return start[s - 1]; }
  /// One past the last index of section s (T + 1 for section 5).
  int section_end(int s) const { return s == 5 ? T + 1 : start[s]; }
  int section_size(int s) const { return section_end(s) - section_begin(s); }
  int section_of(int i) const;
  /// Last index of section 2; the reset acts between it and the next index.
  int kickoff_index() const { return start[2] - 1; }
  int midpoint() const { return T / 2; }

  /// Throws ScheduleError when a section is too short, the ranges do not
  /// partition [0, T], or the midpoint is not airborne.
  void validate() const;
};

inline constexpr std::array<double, 5> kDefaultPhaseFractions = {0.15, 0.20, 0.30, 0.20, 0.15};

PhaseSchedule default_schedule(int T,
                               const std::array<double, 5>& fractions = kDefaultPhaseFractions);

/// Flat decision vector: 14 slots per timestep index (states, controls and
/// reactions) for i = 0..T, followed by the T interval durations.
struct DecisionLayout {
  int T = 0;

  static constexpr int kPerIndex = 14;
  enum Slot : int {
    kX, kY, kPhi, kXdot, kYdot, kPhidot, kXddot, kYddot, kPhiddot,
    kTheta, kThetadot, kThetaddot, kR1, kR2
  };

  int at(int i, Slot slot) const { return kPerIndex * i + slot; }
  int h(int i) const { return kPerIndex * (T + 1) + i; }
  int total() const { return kPerIndex * (T + 1) + T; }
};

struct ProblemSpec {
  SystemParams params;
  PhaseSchedule schedule;
  double jump_height = 0.25;  // COM height required at index T/2 [m]
  double u_ddot_max = 25.0;   // |theta_ddot| bound [rad/s^2]
  double h_min = 5e-4;        // [s]
  double h_max = 0.04;        // [s]
  double regularization_weight = 1e-4;

  /// Throws BuildError naming the first violated precondition.
  void validate() const;
};

struct Trajectory {
  std::vector<BoardState> states;        // T + 1
  std::vector<ControlSample> controls;   // T + 1
  std::vector<ReactionForces> forces;    // T + 1
  std::vector<double> durations;         // T
  std::vector<double> time;              // T + 1, time[0] == 0

  int T() const { return static_cast<int>(durations.size()); }
  /// Recomputes `time` from `durations`.
  void update_time();
};

std::vector<double> encode(const DecisionLayout& layout, const Trajectory& traj);
/// Throws DecodeError when raw.size() != layout.total().
Trajectory decode(const DecisionLayout& layout, std::span<const double> raw);

enum class RecordKind { kEquality, kInequality, kBound };

/// One typed constraint of the transcription. Equalities read value == 0,
/// inequalities value >= 0, bounds lower <= x <= upper on a single slot.
struct ConstraintRecord {
  std::string name;
  int index = 0;  // timestep (or interval) the record belongs to
  RecordKind kind = RecordKind::kEquality;
  std::vector<int> vars;
  nlp::LocalValue value;
  nlp::LocalGradient gradient;
  bool linear = false;
  double rhs = 0.0;  // informational target folded into `value`
  double lower = -nlp::kInf;
  double upper = nlp::kInf;

  /// |value| for equalities, max(0, -value) for inequalities, distance to
  /// the interval for bounds.
  double violation(std::span<const double> raw) const;
};

struct ConstraintSet {
  DecisionLayout layout;
  std::vector<ConstraintRecord> records;
};

/// Every rule of the five-section program; see the README for the list.
ConstraintSet build_constraints(const ProblemSpec& spec);

struct ConstraintCensus {
  int equalities = 0;
  int inequalities = 0;
  int bounds = 0;
  int total() const { return equalities + inequalities + bounds; }
};

/// Closed-form record counts for a schedule, independent of the builder.
ConstraintCensus constraint_census(const PhaseSchedule& schedule);

/// Bound records become variable bounds; the rest become NLP constraints.
/// Adds the sum of weight * theta_ddot_i^2 * h_i when the weight is positive.
nlp::NlpProblem to_nlp(const ConstraintSet& set, const ProblemSpec& spec);

struct GuessOptions {
  double suggested_duration = 1.0;  // total trick time before clamping [s]
};

/// Bounds-feasible starting point with the rider upright throughout.
std::vector<double> initial_guess(const ProblemSpec& spec, const GuessOptions& options = {});

}  // namespace ollie
