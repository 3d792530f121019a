#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ollie/planner.hpp"

namespace ollie::cli {

struct SweepRange {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
  /// start, start + step, ... up to stop (inclusive within rounding).
  std::vector<double> heights() const;
};

struct RunConfig {
  SystemParams params;
  int T = 60;
  std::array<double, 5> phase_fractions = kDefaultPhaseFractions;
  std::optional<double> jump_height;
  std::optional<SweepRange> sweep;
  double u_ddot_max = 25.0;
  double h_min = 5e-4;
  double h_max = 0.04;
  double regularization_weight = 1e-4;
  PlanOptions plan;
  std::filesystem::path out = "out";

  /// Problem for one height; throws BuildError or ScheduleError.
  ProblemSpec spec_for(double height) const;
};

/// Throws ConfigError on malformed JSON, unknown keys, wrong types or a
/// violated invariant.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace ollie::cli
