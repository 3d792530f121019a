#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "csv.hpp"
#include "ollie/errors.hpp"

namespace ollie::cli {

namespace {

using nlohmann::json;

RunConfig configure(const Flags& flags) {
  RunConfig cfg = load_config(flags.config);
  if (flags.out) cfg.out = *flags.out;
  if (flags.seed) cfg.plan.seed = *flags.seed;
  cfg.plan.verify_tolerance = flags.tol;
  return cfg;
}

json report_json(const PlanResult& r, double height) {
  const nlp::SolveReport& rep = r.report;
  return {
      {"jump_height", height},
      {"status", std::string(nlp::to_string(rep.status))},
      {"max_equality_residual", rep.max_equality_residual},
      {"max_inequality_violation", rep.max_inequality_violation},
      {"iterations", rep.iterations},
      {"wall_time", rep.wall_time},
      {"message", rep.message},
      {"warnings", rep.warnings},
      {"attempts", r.attempts},
      {"verified", r.verification.ok()},
      {"violations", json::parse(r.verification.to_json())},
      {"energy",
       {{"pre_reset", r.energy.pre_reset},
        {"post_reset", r.energy.post_reset},
        {"relative_gain", r.energy.relative_gain()}}},
  };
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_csv(const std::filesystem::path& path, const ProblemSpec& spec, const PlanResult& r) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_trajectory_csv(out, spec.schedule, r.trajectory);
}

std::string height_tag(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", h);
  return buf;
}

}  // namespace

int cmd_solve(const Flags& flags, std::ostream& log) {
  RunConfig cfg;
  ProblemSpec spec;
  try {
    cfg = configure(flags);
    if (!cfg.jump_height) throw ConfigError("solve needs 'jump_height' in the config");
    spec = cfg.spec_for(*cfg.jump_height);
    std::filesystem::create_directories(cfg.out);
  } catch (const std::exception& ex) {
    log << "error: " << ex.what() << '\n';
    return kUsage;
  }
  for (const auto& w : spec.params.validate()) log << "warning: " << w << '\n';

  const PlanResult r = plan(spec, cfg.plan);
  try {
    write_csv(cfg.out / "trajectory.csv", spec, r);
    write_text(cfg.out / "report.json", report_json(r, spec.jump_height).dump(2) + "\n");
  } catch (const std::exception& ex) {
    log << "error: " << ex.what() << '\n';
    return kFailure;
  }
  if (r.report.status != nlp::SolveStatus::kFeasible) {
    log << "no feasible trajectory: " << nlp::to_string(r.report.status) << " ("
        << r.report.message << "), max equality residual " << r.report.max_equality_residual
        << '\n';
    return kFailure;
  }
  if (!r.verification.ok()) {
    log << "verification failed with " << r.verification.violations.size() << " violations\n";
    return kFailure;
  }
  return kSuccess;
}

int cmd_sweep(const Flags& flags, std::ostream& log) {
  RunConfig cfg;
  std::vector<double> heights;
  try {
    cfg = configure(flags);
    if (!cfg.sweep) throw ConfigError("sweep needs a 'sweep' range in the config");
    if (flags.jobs < 1) throw ConfigError("--jobs must be at least 1");
    heights = cfg.sweep->heights();
    std::filesystem::create_directories(cfg.out);
  } catch (const std::exception& ex) {
    log << "error: " << ex.what() << '\n';
    return kUsage;
  }
  if (flags.jobs > 1) cfg.plan.solve.exec = nlp::Exec::kSerial;

  const int n = static_cast<int>(heights.size());
  std::vector<PlanResult> results(n);
  std::vector<ProblemSpec> specs(n);
  std::atomic<int> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (int j = next++; j < n; j = next++) {
      specs[j] = cfg.spec_for(heights[j]);
      results[j] = plan(specs[j], cfg.plan);
      try {
        write_csv(cfg.out / ("trajectory_" + height_tag(heights[j]) + ".csv"), specs[j],
                  results[j]);
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lock(log_mutex);
        log << "error: " << ex.what() << '\n';
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(flags.jobs, n); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ofstream summary(cfg.out / "summary.csv");
  summary << "jump_height,status,max_residual,peak_uddot,time_of_flight\n";
  double last_peak = -1.0;
  for (int j = 0; j < n; ++j) {
    const PlanResult& r = results[j];
    std::string status(nlp::to_string(r.report.status));
    if (r.report.status == nlp::SolveStatus::kFeasible && !r.verification.ok()) {
      status = "unverified";
    }
    const double residual =
        std::max(r.report.max_equality_residual, r.report.max_inequality_violation);
    char line[256];
    std::snprintf(line, sizeof line, "%.17g,%s,%.17g,%.17g,%.17g\n", heights[j], status.c_str(),
                  residual, r.peak_theta_ddot(), r.time_of_flight(specs[j].schedule));
    summary << line;
    if (r.ok()) {
      if (r.peak_theta_ddot() < last_peak) {
        log << "warning: peak |theta_ddot| drops from " << last_peak << " to "
            << r.peak_theta_ddot() << " at jump height " << heights[j] << '\n';
      }
      last_peak = r.peak_theta_ddot();
    }
  }
  if (!summary) {
    log << "error: cannot write the sweep summary\n";
    return kFailure;
  }
  return kSuccess;
}

int cmd_verify(const Flags& flags, const std::filesystem::path& trajectory, std::ostream& out,
               std::ostream& log) {
  ProblemSpec spec;
  Trajectory traj;
  try {
    RunConfig cfg = configure(flags);
    if (!cfg.jump_height) throw ConfigError("verify needs 'jump_height' in the config");
    spec = cfg.spec_for(*cfg.jump_height);
    std::ifstream in(trajectory);
    if (!in) throw Error("cannot read " + trajectory.string());
    traj = read_trajectory_csv(in, spec.schedule.T);
  } catch (const std::exception& ex) {
    log << "error: " << ex.what() << '\n';
    return kUsage;
  }
  const VerificationReport report = verify_trajectory(spec, traj, flags.tol);
  if (report.ok()) return kSuccess;
  out << "index,name,magnitude\n";
  for (const auto& v : report.violations) {
    char line[160];
    std::snprintf(line, sizeof line, "%d,%s,%.6e\n", v.index, v.name.c_str(), v.magnitude);
    out << line;
  }
  return kFailure;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Plan and verify ollie jump trajectories"};
  app.require_subcommand(1);
  Flags flags;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string trajectory;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--tol", flags.tol, "verification tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--jobs", flags.jobs, "parallel sweep rows")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed for jittered restarts");
  };
  CLI::App* solve = app.add_subcommand("solve", "solve one jump height");
  CLI::App* sweep = app.add_subcommand("sweep", "solve a range of jump heights");
  CLI::App* verify = app.add_subcommand("verify", "check a trajectory CSV against a config");
  add_common(solve);
  add_common(sweep);
  add_common(verify);
  verify->add_option("trajectory", trajectory, "trajectory CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex);
    return code == 0 ? kSuccess : kUsage;
  }
  for (CLI::App* sub : {solve, sweep, verify}) {
    if (sub->count("--out")) flags.out = out_dir;
    if (sub->count("--seed")) flags.seed = seed;
  }
  if (*solve) return cmd_solve(flags, std::cerr);
  if (*sweep) return cmd_sweep(flags, std::cerr);
  return cmd_verify(flags, trajectory, std::cout, std::cerr);
}

}  // namespace ollie::cli
