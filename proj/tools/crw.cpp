// crw: command-line front end for simulations, sweeps and stability checks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "crw/crw.hpp"

#ifndef CRW_CONFIG_DIR
#define CRW_CONFIG_DIR "configs"
#endif

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> horizon;
  std::string out;
  unsigned jobs = 1;
  bool trace = false;
  std::string policy;
  std::optional<double> alpha;
  std::string check_name;
  std::optional<double> eps;
  bool json = false;
};

crw::ExperimentConfig load_with_overrides(const Options& opt) {
  auto cfg = crw::load_experiment(opt.config);
  if (opt.seed) cfg.seeds = {*opt.seed};
  if (opt.horizon) cfg.horizon = *opt.horizon;
  if (!opt.out.empty()) cfg.output_path = opt.out;
  return cfg;
}

// Resolves against the output directory override and creates parent directories.
std::filesystem::path open_output(const std::string& path) {
  auto p = crw::resolve_output_path(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  return p;
}

int cmd_simulate(const Options& opt) {
  const auto cfg = load_with_overrides(opt);
  std::size_t index = 0;
  if (!opt.policy.empty()) {
    while (index < cfg.policies.size() && cfg.policies[index].label != opt.policy) ++index;
    if (index == cfg.policies.size()) throw crw::Error(crw::ErrorCode::ConfigParseError, "no policy '" + opt.policy + "'");
  }
  const double alpha = opt.alpha.value_or(cfg.alphas.front());
  const auto result = crw::run_simulation(cfg, index, alpha, cfg.seeds.front(), opt.trace);
  auto doc = crw::io::metrics_to_json(result.metrics);
  doc["policy"] = cfg.policies[index].label;
  doc["alpha"] = alpha;
  doc["config_hash"] = crw::config_hash(cfg);
  if (opt.out.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::ofstream(open_output(opt.out), std::ios::binary) << doc.dump(2) << '\n';
  }
  if (opt.trace) {
    auto path = open_output(opt.out.empty() ? "trace.csv" : opt.out);
    if (!opt.out.empty()) path.replace_extension(".trace.csv");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw crw::Error(crw::ErrorCode::ConfigParseError, "cannot write '" + path.string() + "'");
    crw::io::write_trace_csv(os, result.trace, cfg.network.m(), cfg.network.l());
    std::cerr << "trace written to " << path.string() << '\n';
  }
  return crw::kExitOk;
}

int cmd_sweep(const Options& opt) {
  const auto cfg = load_with_overrides(opt);
  const auto result = crw::run_experiment(cfg, opt.jobs);
  std::cout << result.rows.size() << " rows -> " << result.csv_path.string() << " (config " << result.hash << ")\n";
  return crw::kExitOk;
}

int cmd_check(const Options& opt) {
  auto cfg = crw::parse_check_config(crw::io::read_json_file(opt.config));
  if (opt.seed) cfg.sample.rng_seed = *opt.seed;
  if (opt.eps) cfg.eps = opt.eps;
  const auto report = crw::run_check(cfg, opt.check_name);
  if (opt.json)
    std::cout << crw::io::report_to_json(report).dump(2) << '\n';
  else
    crw::io::write_report_table(std::cout, report);
  if (!opt.out.empty())
    std::ofstream(open_output(opt.out), std::ios::binary) << crw::io::report_to_json(report).dump(2) << '\n';
  return report.passed ? crw::kExitOk : crw::kExitCheckFailed;
}

int cmd_list(const Options& opt) {
  const auto entries = crw::list_examples(CRW_CONFIG_DIR);
  if (opt.json)
    std::cout << crw::examples_json(entries).dump() << '\n';
  else
    crw::write_examples_text(std::cout, entries);
  return crw::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controlled random walk simulator and stability auditor"};
  app.set_version_flag("--version", crw::kVersion);
  app.require_subcommand(1);
  Options opt;

  auto* sim = app.add_subcommand("simulate", "Run one policy at one load and print its metrics");
  sim->add_option("--config", opt.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", opt.seed, "Seed (default: first seed in the config)");
  sim->add_option("--horizon", opt.horizon, "Number of slots");
  sim->add_option("--out", opt.out, "Write metrics JSON here instead of stdout");
  sim->add_flag("--trace", opt.trace, "Also write the per-slot trace CSV");
  sim->add_option("--policy", opt.policy, "Policy label (default: first)");
  sim->add_option("--alpha", opt.alpha, "Load (default: first grid value)");

  auto* sw = app.add_subcommand("sweep", "Run the policy x load x seed grid and write CSV");
  sw->add_option("--config", opt.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sw->add_option("--seed", opt.seed, "Replace the seed list with this one seed");
  sw->add_option("--horizon", opt.horizon, "Number of slots");
  sw->add_option("--out", opt.out, "CSV path (overrides output_path)");
  sw->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* chk = app.add_subcommand("check", "Audit a stability condition for a field");
  chk->add_option("name", opt.check_name, "thm41-1 | thm41-2 | cor42 | cor43 | dp | remark3")->required();
  chk->add_option("--config", opt.config, "Check config (JSON)")->required()->check(CLI::ExistingFile);
  chk->add_option("--seed", opt.seed, "Sampling seed");
  chk->add_option("--eps", opt.eps, "Tolerance");
  chk->add_option("--out", opt.out, "Write the JSON report here");
  chk->add_flag("--json", opt.json, "Print JSON instead of a table");

  auto* list = app.add_subcommand("list-examples", "List built-in networks, bundled configs and field kinds");
  list->add_flag("--json", opt.json, "Print a JSON array of names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return crw::kExitError;
  }

  try {
    if (*sim) return cmd_simulate(opt);
    if (*sw) return cmd_sweep(opt);
    if (*chk) return cmd_check(opt);
    return cmd_list(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return crw::kExitError;
  }
}
