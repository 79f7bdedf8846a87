#pragma once

// Run configuration: `key = value` text with `#` comments, and the dispatcher
// behind the command line tool.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rcm/environment.hpp"
#include "rcm/error.hpp"
#include "rcm/experiments.hpp"
#include "rcm/parallel.hpp"
#include "rcm/report.hpp"
#include "rcm/solvers.hpp"
#include "rcm/walker.hpp"

namespace rcm {

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"gen-env", "heat", "walk", "verify", "report"};
  return names;
}

struct RunConfig {
  std::string command;
  /// verify only.
  std::string experiment;
  std::uint64_t seed = 1;
  std::string out = "rcm-out";
  std::int64_t threads = 1;
  bool force = false;
  /// Box radius for gen-env (default 32) and heat/walk (0 picks one from t).
  std::int64_t radius = 0;
  /// Comma-separated start vertex; empty means the origin.
  std::string source;
  /// Number of walker paths.
  std::int64_t paths = 10000;
  /// Also write every walker path to paths.csv.
  bool dump_paths = false;
  /// Kernel CSV rows below this magnitude are dropped.
  double min_value = 0.0;
  /// report only: the directory holding report.json.
  std::string dir;
  ExperimentParams params;
};

namespace detail {

struct ConfigLine {
  std::size_t line = 0;
  std::string key;
  std::string value;
};

inline std::string_view trim(std::string_view v) {
  while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
  while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.remove_suffix(1);
  return v;
}

inline bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("cannot parse '" + std::string(v) + "' as a boolean");
}

/// Keys of RunConfig outside ExperimentParams.
inline const std::vector<std::string>& run_keys() {
  static const std::vector<std::string> k{"command", "experiment", "seed", "out",        "threads",  "force",
                                          "radius",  "source",     "paths", "dump_paths", "min_value", "dir"};
  return k;
}

inline void set_run_key(RunConfig& c, const std::string& key, std::string_view v) {
  if (key == "command")
    c.command = std::string(v);
  else if (key == "experiment")
    c.experiment = std::string(v);
  else if (key == "seed")
    c.seed = parse_scalar<std::uint64_t>(v);
  else if (key == "out")
    c.out = std::string(v);
  else if (key == "threads")
    c.threads = parse_scalar<std::int64_t>(v);
  else if (key == "force")
    c.force = parse_bool(v);
  else if (key == "radius")
    c.radius = parse_scalar<std::int64_t>(v);
  else if (key == "source")
    c.source = std::string(v);
  else if (key == "paths")
    c.paths = parse_scalar<std::int64_t>(v);
  else if (key == "dump_paths")
    c.dump_paths = parse_bool(v);
  else if (key == "min_value")
    c.min_value = parse_scalar<double>(v);
  else
    c.dir = std::string(v);
}

inline const ParamKey* find_param(const std::string& key) {
  for (const auto& k : param_keys())
    if (k.name == key) return &k;
  return nullptr;
}

inline bool known_key(const std::string& key) {
  return find_param(key) || std::find(run_keys().begin(), run_keys().end(), key) != run_keys().end();
}

inline std::vector<ConfigLine> split_config(std::string_view text) {
  std::vector<ConfigLine> out;
  std::map<std::string, std::size_t> first;
  std::size_t lineno = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (!known_key(key)) throw ConfigError(where + "unknown key '" + key + "'");
    if (auto it = first.find(key); it != first.end())
      throw ConfigError(where + "duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")");
    first[key] = lineno;
    out.push_back({lineno, key, value});
  }
  return out;
}

}  // namespace detail

/// Parses config text, then applies overrides (command-line flags, which win
/// over the file). Defaults depend on the experiment and mode; every key is
/// validated and errors name the offending line and key.
inline RunConfig parse_config(std::string_view text,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  std::vector<detail::ConfigLine> lines = detail::split_config(text);
  for (const auto& [k, v] : overrides) {
    if (!detail::known_key(k)) throw ConfigError("override: unknown key '" + k + "'");
    auto it = std::find_if(lines.begin(), lines.end(), [&](const auto& l) { return l.key == k; });
    if (it != lines.end())
      it->value = v;
    else
      lines.push_back({0, k, v});
  }
  auto where = [](const detail::ConfigLine& l) {
    return (l.line ? "line " + std::to_string(l.line) : std::string("override")) + ": key '" + l.key + "': ";
  };
  auto value_of = [&](const std::string& k) -> const detail::ConfigLine* {
    for (const auto& l : lines)
      if (l.key == k) return &l;
    return nullptr;
  };

  RunConfig cfg;
  const auto* cmd = value_of("command");
  if (!cmd) throw ConfigError("missing required key 'command'");
  cfg.command = cmd->value;
  if (std::find(command_names().begin(), command_names().end(), cfg.command) == command_names().end())
    throw ConfigError(where(*cmd) + "unknown command '" + cfg.command + "'");
  if (cfg.command == "verify") {
    const auto* ex = value_of("experiment");
    if (!ex) throw ConfigError("missing required key 'experiment' for command verify");
    if (std::find(experiment_names().begin(), experiment_names().end(), ex->value) == experiment_names().end())
      throw ConfigError(where(*ex) + "unknown experiment '" + ex->value + "'");
    const auto* mode = value_of("mode");
    cfg.params = default_params(ex->value, mode ? std::string_view(mode->value) : "parabolic");
  }
  if (cfg.command == "report" && !value_of("dir")) throw ConfigError("missing required key 'dir' for command report");

  for (const auto& l : lines) {
    try {
      if (const auto* pk = detail::find_param(l.key))
        pk->set(cfg.params, l.value);
      else
        detail::set_run_key(cfg, l.key, l.value);
    } catch (const ConfigError& e) {
      throw ConfigError(where(l) + e.what());
    }
  }
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  if (cfg.paths < 1) throw ConfigError("paths must be >= 1");
  return cfg;
}

inline Json to_json(const RunConfig& c) {
  Json j = Json::object();
  j["command"] = c.command;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["threads"] = c.threads;
  j["force"] = c.force;
  j["radius"] = c.radius;
  j["source"] = c.source;
  j["paths"] = c.paths;
  j["dump_paths"] = c.dump_paths;
  j["min_value"] = c.min_value;
  j["dir"] = c.dir;
  j["params"] = to_json(c.params);
  return j;
}

namespace detail {

inline Point parse_point(const std::string& s, int d) {
  if (s.empty()) return origin(d);
  const auto coords = parse_list<std::int64_t>(s);
  if (static_cast<int>(coords.size()) != d)
    throw ConfigError("source '" + s + "' does not have " + std::to_string(d) + " coordinates");
  return Point::from(coords);
}

inline void prepare_out(const RunConfig& c) {
  namespace fs = std::filesystem;
  if (fs::exists(c.out)) {
    if (!c.force) throw ConfigError("output directory '" + c.out + "' exists; pass --force to overwrite");
    if (!fs::is_directory(c.out)) throw ConfigError("output path '" + c.out + "' is not a directory");
  }
  fs::create_directories(c.out);
}

inline void write_json(const Json& j, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

inline Json command_report(const RunConfig& c) {
  Json j;
  j["report_version"] = 1;
  j["command"] = c.command;
  j["config"] = to_json(c);
  return j;
}

inline int run_report(const RunConfig& c, std::ostream& log) {
  const std::filesystem::path path = std::filesystem::path(c.dir) / "report.json";
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  Json j;
  try {
    j = Json::parse(is);
  } catch (const std::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (j.value("report_version", 0) != 1) throw FormatError(path.string() + ": unsupported report_version");
  log << j.value("experiment", j.value("command", std::string("?"))) << ": " << j.value("status", std::string("done"))
      << '\n';
  if (j.contains("checks"))
    for (const auto& ch : j["checks"])
      log << "  [" << (ch.value("passed", false) ? "pass" : "FAIL") << "] " << ch.value("name", std::string()) << ' '
          << ch.value("detail", std::string()) << '\n';
  if (j.contains("trials")) log << "  trials " << j["trials"] << ", skipped " << j.value("skipped", 0) << '\n';
  const std::string status = j.value("status", std::string("pass"));
  return status == "pass" ? 0 : 1;
}

}  // namespace detail

/// Executes a configuration. Exit status: 0 pass or completion, 1 experiment
/// fail or inconclusive, 2 configuration error, 3 runtime error.
inline int run(const RunConfig& c, std::ostream& log = std::cerr) {
  namespace fs = std::filesystem;
  try {
    set_thread_count(static_cast<unsigned>(c.threads));
    if (c.command == "report") return detail::run_report(c, log);
    const int d = c.params.d;
    const Point x0 = detail::parse_point(c.source, d);
    if (c.command == "verify") {
      ExperimentParams p = c.params;
      // Surface parameter errors as configuration errors before touching the disk.
      derive_exponents(p.d, p.p, p.q);
      parse_law(p.law);
      detail::prepare_out(c);
      ExperimentReport r = run_experiment(c.experiment, p, c.seed);
      r.config = to_json(c);
      write_report(r, c.out);
      log << c.experiment << ": " << to_string(r.status) << '\n';
      for (const auto& ch : r.checks)
        log << "  [" << (ch.passed ? "pass" : "FAIL") << "] " << ch.name << ' ' << ch.detail << '\n';
      return r.status == Status::pass ? 0 : 1;
    }

    EnvironmentLaw law = parse_law(c.params.law, c.seed);
    if (c.command == "gen-env") {
      detail::prepare_out(c);
      const ConductanceField w = generate(law, LatticeBox(x0, c.radius > 0 ? c.radius : 32));
      save(w, (fs::path(c.out) / "env.txt").string());
      Json j = detail::command_report(c);
      j["bonds"] = w.bonds().size();
      detail::write_json(j, fs::path(c.out) / "report.json");
      return 0;
    }
    SolverConfig scfg = detail::solver_config(c.params);
    scfg.radius = c.radius;
    const double t = c.params.t;
    if (c.command == "heat") {
      detail::prepare_out(c);
      const double times[1] = {t};
      const auto [cols, w] = heat_kernel_for_law(law, x0, times, scfg);
      std::ofstream os(fs::path(c.out) / "kernel.csv");
      write_kernel_csv(os, cols[0], c.min_value);
      Json j = detail::command_report(c);
      j["mass"] = cols[0].mass();
      j["leak"] = cols[0].leak;
      j["box_radius"] = w.box().radius();
      detail::write_json(j, fs::path(c.out) / "report.json");
      return 0;
    }
    // walk
    detail::prepare_out(c);
    const std::int64_t R = c.radius > 0 ? c.radius : auto_radius(d, t, 1.0, 1e-6);
    const ConductanceField w = generate(law, LatticeBox(x0, R));
    const EmpiricalKernel ek = empirical_kernel(w, x0, t, static_cast<std::size_t>(c.paths), c.seed);
    {
      std::ofstream os(fs::path(c.out) / "kernel.csv");
      write_kernel_csv(os, HeatKernelColumn{x0, t, ek.probabilities, ek.truncated_fraction, 0.0}, c.min_value);
    }
    if (c.dump_paths) {
      std::vector<PathSample> paths(static_cast<std::size_t>(c.paths));
      parallel_for(paths.size(), [&](std::size_t k) { paths[k] = sample_path(w, x0, t, c.seed, k); });
      std::ofstream os(fs::path(c.out) / "paths.csv");
      write_path_csv(os, paths);
    }
    Json j = detail::command_report(c);
    j["truncated_fraction"] = ek.truncated_fraction;
    j["truncation_warning"] = ek.warning;
    j["box_radius"] = R;
    detail::write_json(j, fs::path(c.out) / "report.json");
    return 0;
  } catch (const ConfigError& e) {
    log << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace rcm
