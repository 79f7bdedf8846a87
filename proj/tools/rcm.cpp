// rcm: command line front end. Flags override keys from --config.
//
//   rcm verify oscillation --config osc.cfg --out runs/osc --threads 4
//   rcm gen-env --set law='pareto_mixture(8,8)' --seed 7 --out env7
//   rcm report runs/osc

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rcm/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Random conductance model: heat kernels, walks and regularity experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out, experiment, dir;
  std::uint64_t seed = 0;
  std::int64_t threads = 0;
  bool force = false;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  app.add_flag("--force", force, "overwrite an existing output directory");
  app.add_option("--set", sets, "extra key=value settings, applied last");

  for (const char* name : {"gen-env", "heat", "walk"}) app.add_subcommand(name, std::string("run ") + name);
  auto* verify = app.add_subcommand("verify", "run an experiment and write report.json and trials.csv");
  verify->add_option("experiment", experiment, "experiment name")->required();
  auto* report = app.add_subcommand("report", "summarize a report directory");
  report->add_option("dir", dir, "directory holding report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string text;
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) {
      std::cerr << "configuration error: cannot read " << config_path << '\n';
      return 2;
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    text = ss.str();
  }

  std::vector<std::pair<std::string, std::string>> overrides;
  overrides.emplace_back("command", app.get_subcommands().front()->get_name());
  if (!experiment.empty()) overrides.emplace_back("experiment", experiment);
  if (!dir.empty()) overrides.emplace_back("dir", dir);
  if (!out.empty()) overrides.emplace_back("out", out);
  if (app.count("--seed")) overrides.emplace_back("seed", std::to_string(seed));
  if (threads > 0) overrides.emplace_back("threads", std::to_string(threads));
  if (force) overrides.emplace_back("force", "true");
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::cerr << "configuration error: --set expects key=value, got '" << s << "'\n";
      return 2;
    }
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }

  rcm::RunConfig cfg;
  try {
    cfg = rcm::parse_config(text, overrides);
  } catch (const rcm::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  }
  return rcm::run(cfg, std::cerr);
}
