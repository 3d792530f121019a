#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace ollie::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kUsage = 2 };

struct Flags {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // overrides the config's "out"
  double tol = 1e-5;                          // verification tolerance
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

int cmd_solve(const Flags& flags, std::ostream& log);
int cmd_sweep(const Flags& flags, std::ostream& log);
int cmd_verify(const Flags& flags, const std::filesystem::path& trajectory, std::ostream& out,
               std::ostream& log);

/// Parses argv and dispatches; usage errors return kUsage.
int run(int argc, const char* const* argv);

}  // namespace ollie::cli
