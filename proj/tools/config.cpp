#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ollie/errors.hpp"

namespace ollie::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(std::string("'") + key + "' must be finite");
  return x;
}

int integer(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

bool boolean(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(std::string("'") + key + "' must be true or false");
  return v.get<bool>();
}

}  // namespace

std::vector<double> SweepRange::heights() const {
  std::vector<double> out;
  const double n = std::floor((stop - start) / step + 1e-9);
  for (int i = 0; i <= static_cast<int>(n); ++i) out.push_back(start + i * step);
  return out;
}

ProblemSpec RunConfig::spec_for(double height) const {
  ProblemSpec spec;
  spec.params = params;
  spec.schedule = default_schedule(T, phase_fractions);
  spec.jump_height = height;
  spec.u_ddot_max = u_ddot_max;
  spec.h_min = h_min;
  spec.h_max = h_max;
  spec.regularization_weight = regularization_weight;
  spec.validate();
  return spec;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
  }
  reject_unknown(doc,
                 {"params", "T", "phase_fractions", "jump_height", "sweep", "u_ddot_max", "h_min",
                  "h_max", "regularization_weight", "solver", "out"},
                 "config");

  RunConfig cfg;
  if (doc.contains("params")) {
    const json& p = doc.at("params");
    reject_unknown(p, {"m_r", "m_b", "L", "w", "H", "d", "r", "e", "g"}, "params");
    SystemParams& sp = cfg.params;
    sp.m_r = number(p, "m_r", sp.m_r);
    sp.m_b = number(p, "m_b", sp.m_b);
    sp.L = number(p, "L", sp.L);
    sp.w = number(p, "w", sp.w);
    sp.H = number(p, "H", sp.H);
    sp.d = number(p, "d", sp.d);
    sp.r = number(p, "r", sp.r);
    sp.e = number(p, "e", sp.e);
    sp.g = number(p, "g", sp.g);
  }
  cfg.T = integer(doc, "T", cfg.T);
  if (doc.contains("phase_fractions")) {
    const json& f = doc.at("phase_fractions");
    if (!f.is_array() || f.size() != 5) {
      throw ConfigError("'phase_fractions' must be an array of 5 numbers");
    }
    for (std::size_t s = 0; s < 5; ++s) {
      if (!f[s].is_number()) throw ConfigError("'phase_fractions' must be an array of 5 numbers");
      cfg.phase_fractions[s] = f[s].get<double>();
    }
  }
  if (doc.contains("jump_height")) cfg.jump_height = number(doc, "jump_height", 0.0);
  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    reject_unknown(s, {"start", "stop", "step"}, "sweep");
    for (const char* key : {"start", "stop", "step"}) {
      if (!s.contains(key)) throw ConfigError(std::string("sweep needs '") + key + "'");
    }
    SweepRange range{number(s, "start", 0.0), number(s, "stop", 0.0), number(s, "step", 0.0)};
    if (!(range.step > 0.0)) throw ConfigError("sweep step must be positive");
    if (range.start > range.stop) throw ConfigError("sweep range is empty (start > stop)");
    cfg.sweep = range;
  }
  if (cfg.jump_height.has_value() == cfg.sweep.has_value()) {
    throw ConfigError("config needs exactly one of 'jump_height' and 'sweep'");
  }
  cfg.u_ddot_max = number(doc, "u_ddot_max", cfg.u_ddot_max);
  cfg.h_min = number(doc, "h_min", cfg.h_min);
  cfg.h_max = number(doc, "h_max", cfg.h_max);
  cfg.regularization_weight = number(doc, "regularization_weight", cfg.regularization_weight);

  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    reject_unknown(s,
                   {"equality_tolerance", "inequality_tolerance", "max_iterations", "row_scaling",
                    "hessian", "restarts", "max_wall_time"},
                   "solver");
    nlp::SolveOptions& o = cfg.plan.solve;
    o.equality_tolerance = number(s, "equality_tolerance", o.equality_tolerance);
    o.inequality_tolerance = number(s, "inequality_tolerance", o.inequality_tolerance);
    o.max_iterations = integer(s, "max_iterations", o.max_iterations);
    o.row_scaling = boolean(s, "row_scaling", o.row_scaling);
    o.max_wall_time = number(s, "max_wall_time", o.max_wall_time);
    if (s.contains("hessian")) {
      const json& h = s.at("hessian");
      if (h == "gauss-newton") {
        o.hessian = nlp::HessianMode::kGaussNewton;
      } else if (h == "exact") {
        o.hessian = nlp::HessianMode::kExact;
      } else {
        throw ConfigError("'hessian' must be \"gauss-newton\" or \"exact\"");
      }
    }
    cfg.plan.restarts = integer(s, "restarts", cfg.plan.restarts);
    if (!(o.equality_tolerance > 0.0) || !(o.inequality_tolerance > 0.0)) {
      throw ConfigError("solver tolerances must be positive");
    }
    if (o.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    if (cfg.plan.restarts < 0) throw ConfigError("restarts must be non-negative");
  }
  if (doc.contains("out")) {
    if (!doc.at("out").is_string()) throw ConfigError("'out' must be a string");
    cfg.out = doc.at("out").get<std::string>();
  }

  // Schema-level invariants of the inner types.
  try {
    if (cfg.jump_height) {
      cfg.spec_for(*cfg.jump_height);
    } else {
      for (double h : cfg.sweep->heights()) cfg.spec_for(h);
    }
  } catch (const Error& ex) {
    throw ConfigError(ex.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

}  // namespace ollie::cli
