#ifndef CRW_HARNESS_HPP
#define CRW_HARNESS_HPP

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crw/analysis.hpp"
#include "crw/io.hpp"
#include "crw/model.hpp"
#include "crw/sim.hpp"

namespace crw {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kRngName = "philox4x32-10";
/// Relative output paths resolve against this directory when it is set.
inline constexpr const char* kOutputDirEnv = "CRW_OUTPUT_DIR";

/// Exit codes: 0 success or pass, 1 check failed, 2 usage, config or runtime error.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitError = 2 };

struct PolicyEntry {
  std::string label;
  FieldSpec field;
};

struct ExperimentConfig {
  NetworkSpec network;
  std::vector<PolicyEntry> policies;
  CostFunction cost;
  std::vector<double> alphas;
  std::uint64_t horizon = 10000;
  std::vector<std::uint64_t> seeds;
  std::string output_path;
  std::vector<double> arrival_pattern;
  std::string description;
};

/// Unit vector on every queue with positive nominal arrival rate; e_1 if none.
inline std::vector<double> default_arrival_pattern(const NetworkSpec& spec) {
  std::vector<double> p(spec.m(), 0.0);
  bool any = false;
  for (std::size_t i = 0; i < spec.m(); ++i)
    if (spec.alpha[i] > 0.0) p[i] = 1.0, any = true;
  if (!any && !p.empty()) p[0] = 1.0;
  return p;
}

inline ExperimentConfig parse_experiment(const io::json& j) {
  using io::detail::get;
  using io::detail::get_or;
  if (!j.is_object()) io::detail::parse_error("experiment config must be an object");
  ExperimentConfig cfg;
  cfg.description = get_or<std::string>(j, "description", "");
  if (!j.contains("network")) io::detail::parse_error("missing key 'network'");
  cfg.network = io::network_from_json(j.at("network"));
  if (!j.contains("cost")) io::detail::parse_error("missing key 'cost'");
  cfg.cost = io::cost_from_json(j.at("cost"));
  cfg.alphas = get<std::vector<double>>(j, "alphas");
  if (cfg.alphas.empty()) io::detail::parse_error("'alphas' is empty");
  cfg.horizon = get_or<std::uint64_t>(j, "horizon", 10000);
  if (cfg.horizon < 1) io::detail::parse_error("'horizon' must be >= 1");
  cfg.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {0});
  if (cfg.seeds.empty()) io::detail::parse_error("'seeds' is empty");
  cfg.output_path = get_or<std::string>(j, "output_path", "sweep.csv");
  cfg.arrival_pattern = get_or<std::vector<double>>(j, "arrival_pattern", {});
  if (cfg.arrival_pattern.empty()) cfg.arrival_pattern = default_arrival_pattern(cfg.network);

  if (!j.contains("policies") || !j.at("policies").is_array() || j.at("policies").empty())
    io::detail::parse_error("'policies' must be a non-empty array");
  std::set<std::string> labels;
  for (const auto& p : j.at("policies")) {
    PolicyEntry entry;
    if (!p.contains("field")) io::detail::parse_error("policy entry needs 'field'");
    entry.field = io::field_spec_from_json(p.at("field"), cfg.cost);
    entry.label = get_or<std::string>(p, "label", std::string(to_string(entry.field.kind)));
    if (!labels.insert(entry.label).second) io::detail::parse_error("duplicate policy label '" + entry.label + "'");
    cfg.policies.push_back(std::move(entry));
  }
  return cfg;
}

inline ExperimentConfig load_experiment(const std::string& path) { return parse_experiment(io::read_json_file(path)); }

/// Canonical form of everything that affects results. output_path and
/// description are excluded.
inline io::json normalized_config(const ExperimentConfig& cfg) {
  io::json policies = io::json::array();
  for (const auto& p : cfg.policies) policies.push_back({{"label", p.label}, {"field", io::field_spec_to_json(p.field)}});
  return {{"network", io::network_to_json(cfg.network)},
          {"policies", std::move(policies)},
          {"cost", io::cost_to_json(cfg.cost)},
          {"alphas", cfg.alphas},
          {"horizon", cfg.horizon},
          {"seeds", cfg.seeds},
          {"arrival_pattern", cfg.arrival_pattern},
          {"rng", kRngName}};
}

/// 64-bit FNV-1a over the canonical dump, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = normalized_config(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::filesystem::path resolve_output_path(const std::string& path) {
  std::filesystem::path p(path);
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir && p.is_relative()) p = std::filesystem::path(dir) / p;
  return p;
}

inline SweepGrid make_sweep_grid(const ExperimentConfig& cfg) {
  SweepGrid grid{validate_network(cfg.network), cfg.arrival_pattern, {}, cfg.alphas, cfg.seeds, cfg.horizon, cfg.cost};
  for (const auto& p : cfg.policies) grid.policies.push_back({make_field(p.field), p.label});
  return grid;
}

/// Writes a warning line for every grid load that is not stabilizable.
inline void warn_unstabilizable(const SweepGrid& grid, std::ostream& log) {
  for (double a : grid.alphas) {
    const auto report = check_stabilizable(grid.network.with_alpha(scaled_arrivals(grid.arrival_pattern, a)));
    if (!report.stabilizable)
      log << "warning: alpha = " << io::format_double(a) << " is not stabilizable (margin "
          << io::format_double(report.margin) << ")\n";
  }
}

struct ExperimentResult {
  std::vector<SweepRow> rows;
  std::filesystem::path csv_path;
  std::filesystem::path sidecar_path;
  std::string hash;
};

inline std::filesystem::path sidecar_path_for(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta.json");
  return p;
}

/// Runs the sweep, then writes the CSV and a JSON sidecar holding the config
/// hash and tool version. Bad results never change the outcome; only errors throw.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned jobs = 1, std::ostream& log = std::cerr) {
  const auto grid = make_sweep_grid(cfg);
  warn_unstabilizable(grid, log);
  ExperimentResult result;
  result.rows = sweep(grid, jobs);
  result.hash = config_hash(cfg);
  result.csv_path = resolve_output_path(cfg.output_path);
  result.sidecar_path = sidecar_path_for(result.csv_path);
  if (result.csv_path.has_parent_path()) std::filesystem::create_directories(result.csv_path.parent_path());
  {
    std::ofstream out(result.csv_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigParseError, "cannot write '" + result.csv_path.string() + "'");
    io::write_sweep_csv(out, result.rows);
  }
  io::json meta{{"config_hash", result.hash},
                {"tool_version", kVersion},
                {"rows", result.rows.size()},
                {"csv", result.csv_path.filename().string()},
                {"config", normalized_config(cfg)}};
  std::ofstream(result.sidecar_path, std::ios::binary) << meta.dump(2) << '\n';
  return result;
}

/// A single run: one policy, one load, one seed.
inline SimResult run_simulation(const ExperimentConfig& cfg, std::size_t policy_index, double alpha, std::uint64_t seed,
                                bool record_trace) {
  if (policy_index >= cfg.policies.size()) throw Error(ErrorCode::InvalidParams, "policy index out of range");
  const auto& p = cfg.policies[policy_index];
  const auto net = validate_network(cfg.network).with_alpha(scaled_arrivals(cfg.arrival_pattern, alpha));
  RunConfig run{net, {make_field(p.field), p.label}, cfg.horizon, seed, cfg.cost, record_trace};
  return simulate(run);
}

// ---------------------------------------------------------------------------
// Checks

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"thm41-1", "thm41-2", "cor42", "cor43", "dp", "remark3"};
  return names;
}

/// Input for `check`. Keys: "field", "eps", "cost", "network", "states",
/// "perturbation", "theta", "sample".
struct CheckConfig {
  std::optional<FieldSpec> field;
  std::optional<double> eps;
  std::optional<CostFunction> cost;
  std::optional<NetworkSpec> network;
  std::vector<QueueState> states;
  Perturbation perturbation = Perturbation::Log;
  double theta = 1.0;
  SampleSpec sample;
};

inline SampleSpec sample_from_json(const io::json& j, SampleSpec s = {}) {
  using io::detail::get_or;
  s.shell_radii = get_or(j, "shell_radii", s.shell_radii);
  s.points_per_shell = get_or(j, "points_per_shell", s.points_per_shell);
  s.face_points = get_or(j, "face_points", s.face_points);
  s.perturbations_per_point = get_or(j, "perturbations_per_point", s.perturbations_per_point);
  s.delta_norm_bound = get_or(j, "C1", s.delta_norm_bound);
  s.small_coord_bound = get_or(j, "C2", s.small_coord_bound);
  s.rng_seed = get_or(j, "rng_seed", s.rng_seed);
  s.dimension = get_or(j, "dimension", s.dimension);
  return s;
}

inline CheckConfig parse_check_config(const io::json& j) {
  using io::detail::get;
  using io::detail::get_or;
  if (!j.is_object()) io::detail::parse_error("check config must be an object");
  CheckConfig cfg;
  if (j.contains("cost")) cfg.cost = io::cost_from_json(j.at("cost"));
  if (j.contains("field")) cfg.field = io::field_spec_from_json(j.at("field"), cfg.cost);
  if (j.contains("eps")) cfg.eps = get<double>(j, "eps");
  if (j.contains("network")) cfg.network = io::network_from_json(j.at("network"));
  for (const auto& s : get_or<std::vector<std::vector<std::int64_t>>>(j, "states", {})) cfg.states.push_back(QueueState{s});
  if (j.contains("perturbation")) {
    const auto p = io::detail::lower(get<std::string>(j, "perturbation"));
    if (p == "exp") cfg.perturbation = Perturbation::Exp;
    else if (p == "log") cfg.perturbation = Perturbation::Log;
    else io::detail::parse_error("perturbation must be 'exp' or 'log'");
  }
  cfg.theta = get_or(j, "theta", cfg.theta);
  if (j.contains("sample")) cfg.sample = sample_from_json(j.at("sample"));
  return cfg;
}

inline double default_eps(const std::string& name) { return name == "cor42" ? 0.05 : 0.1; }

inline CheckReport run_check(const CheckConfig& cfg, const std::string& name) {
  auto known = check_names();
  if (std::find(known.begin(), known.end(), name) == known.end())
    throw Error(ErrorCode::UnknownCheck, "unknown check '" + name + "'");
  const double eps = cfg.eps.value_or(default_eps(name));
  auto need_field = [&] {
    if (!cfg.field) io::detail::parse_error("check '" + name + "' needs a 'field'");
    return make_field(*cfg.field);
  };
  auto need_cost = [&] {
    if (!cfg.cost) io::detail::parse_error("check '" + name + "' needs a 'cost'");
    return *cfg.cost;
  };
  if (name == "thm41-1") return check_thm41_cond1(need_field(), eps, cfg.sample);
  if (name == "thm41-2") return check_thm41_cond2(need_field(), eps, cfg.sample);
  if (name == "cor42") return check_cor42(need_field(), eps, cfg.sample);
  if (name == "remark3") return check_remark3(need_field(), eps, cfg.sample);
  if (name == "cor43") {
    Cor43Options opt;
    opt.theta = cfg.theta;
    return check_cor43(need_cost(), cfg.perturbation, eps, opt);
  }
  if (!cfg.network) io::detail::parse_error("check 'dp' needs a 'network'");
  const auto net = validate_network(*cfg.network);
  return check_dp_inequality(need_field(), need_cost(), net, cfg.states);
}

// ---------------------------------------------------------------------------
// Listing

struct ExampleEntry {
  std::string category;
  std::string name;
  std::string summary;
};

inline std::vector<ExampleEntry> list_examples(const std::filesystem::path& config_dir) {
  std::vector<ExampleEntry> out{
      {"network", "fig1-loop", "5 queues, 6 activities, two servers with a feedback loop; arrivals at queue 1"},
      {"network", "tandem2", "two queues in series, one server each; arrivals at queue 1"},
  };
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  if (std::filesystem::is_directory(config_dir, ec))
    for (const auto& e : std::filesystem::directory_iterator(config_dir, ec))
      if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::string summary;
    try {
      summary = io::read_json_file(f.string()).value("description", "");
    } catch (const std::exception&) {
      summary = "(unreadable)";
    }
    out.push_back({"config", f.filename().string(), summary});
  }
  const std::pair<FieldKind, const char*> kinds[] = {
      {FieldKind::MaxWeight, "mu = D x"},
      {FieldKind::HMaxWeightExp, "gradient of h0 at the exponentially perturbed state"},
      {FieldKind::HMaxWeightLog, "gradient of h0 at the logarithmically perturbed state"},
      {FieldKind::MuPTheta, "P_theta(x) times c (linear cost) or grad h0"},
      {FieldKind::Custom, "one prefix expression per queue"},
  };
  for (const auto& [k, s] : kinds) out.push_back({"field", std::string(to_string(k)), s});
  return out;
}

inline void write_examples_text(std::ostream& os, const std::vector<ExampleEntry>& entries) {
  std::string last;
  for (const auto& e : entries) {
    if (e.category != last) {
      os << (last.empty() ? "" : "\n") << e.category << "s:\n";
      last = e.category;
    }
    os << "  " << e.name;
    if (!e.summary.empty()) os << std::string(e.name.size() < 22 ? 22 - e.name.size() : 1, ' ') << e.summary;
    os << '\n';
  }
}

inline io::json examples_json(const std::vector<ExampleEntry>& entries) {
  io::json names = io::json::array();
  for (const auto& e : entries) names.push_back(e.name);
  return names;
}

}  // namespace crw

#endif  // CRW_HARNESS_HPP
