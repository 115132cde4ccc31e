#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "crw/harness.hpp"

using namespace crw;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = CRW_TEST_CONFIG_DIR;

io::json small_experiment() {
  return io::json::parse(R"({
    "network": "tandem2",
    "cost": {"kind": "linear", "c": [1, 1]},
    "policies": [{"label": "mw", "field": {"kind": "MaxWeight"}},
                 {"label": "mup", "field": {"kind": "MuPTheta", "theta": 1}}],
    "alphas": [0.3, 0.6],
    "horizon": 500,
    "seeds": [1, 2],
    "output_path": "small.csv"
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidParams;  // sentinel: nothing thrown
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("crw-test-" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
    setenv(kOutputDirEnv, path_.c_str(), 1);
  }
  ~TempDir() {
    unsetenv(kOutputDirEnv);
    fs::remove_all(path_);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

TEST(Network, JsonRoundTrip) {
  for (const auto& name : builtin_network_names()) {
    const auto spec = *builtin_network(name);
    const auto back = io::network_from_json(io::network_to_json(spec));
    EXPECT_EQ(back.B, spec.B);
    EXPECT_EQ(back.C, spec.C);
    EXPECT_EQ(back.alpha, spec.alpha);
  }
  EXPECT_EQ(code_of([] { io::network_from_json("nope"); }), ErrorCode::ConfigParseError);
  const auto j = io::json::parse(R"({"m": 3, "l": 2, "B": [[-1,0],[1,-1]], "C": [[1,0],[0,1]], "alpha": [0.1, 0]})");
  EXPECT_EQ(code_of([&] { io::network_from_json(j); }), ErrorCode::DimensionMismatch);
}

TEST(Field, JsonRoundTrip) {
  const FieldSpec specs[] = {FieldSpec::max_weight({1, 2}), FieldSpec::mu_p_theta(CostFunction::quadratic({1, 3}), 2),
                             FieldSpec::h_max_weight_log(CostFunction::tandem_fluid(1, 2, 0.5, 1), 4),
                             FieldSpec::custom({"(* x1 x2)", "x1"})};
  for (const auto& s : specs) {
    const auto j = io::field_spec_to_json(s);
    EXPECT_EQ(io::field_spec_to_json(io::field_spec_from_json(j)), j);
  }
  EXPECT_EQ(code_of([] { io::field_spec_from_json(io::json::parse(R"({"kind": "Magic"})")); }),
            ErrorCode::ConfigParseError);
}

TEST(Experiment, ParseErrors) {
  auto j = small_experiment();
  j["alphas"] = io::json::array();
  EXPECT_EQ(code_of([&] { parse_experiment(j); }), ErrorCode::ConfigParseError);
  j = small_experiment();
  j["policies"][1]["label"] = "mw";
  EXPECT_EQ(code_of([&] { parse_experiment(j); }), ErrorCode::ConfigParseError);
  j = small_experiment();
  j.erase("cost");
  EXPECT_EQ(code_of([&] { parse_experiment(j); }), ErrorCode::ConfigParseError);
}

TEST(Experiment, HashTracksSemanticFields) {
  const auto base = config_hash(parse_experiment(small_experiment()));
  auto j = small_experiment();
  j["output_path"] = "elsewhere.csv";
  EXPECT_EQ(config_hash(parse_experiment(j)), base);
  j["description"] = "text only";
  EXPECT_EQ(config_hash(parse_experiment(j)), base);
  const std::vector<std::pair<const char*, io::json>> changes{
      {"seeds", {1, 3}}, {"horizon", 501}, {"alphas", {0.3, 0.7}}, {"cost", {{"kind", "linear"}, {"c", {1, 2}}}}};
  for (const auto& [key, value] : changes) {
    auto k = small_experiment();
    k[key] = value;
    EXPECT_NE(config_hash(parse_experiment(k)), base) << key;
  }
  auto t = small_experiment();
  t["policies"][1]["field"]["theta"] = 2;
  EXPECT_NE(config_hash(parse_experiment(t)), base);
}

TEST(Experiment, RunWritesIdenticalCsvAndSidecar) {
  TempDir dir;
  const auto cfg = parse_experiment(small_experiment());
  std::ostringstream log;
  const auto a = run_experiment(cfg, 1, log);
  const auto first = slurp(a.csv_path);
  const auto b = run_experiment(cfg, 3, log);
  EXPECT_EQ(a.csv_path, dir.path() / "small.csv");
  EXPECT_EQ(slurp(b.csv_path), first);
  EXPECT_EQ(a.rows.size(), 2u * 2u * 2u);
  EXPECT_EQ(first.substr(0, first.find('\n')), io::kSweepCsvHeader);
  EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 9);
  const auto meta = io::read_json_file(a.sidecar_path.string());
  EXPECT_EQ(meta["config_hash"], config_hash(cfg));
  EXPECT_EQ(meta["tool_version"], kVersion);
}

TEST(Experiment, WarnsOnUnstabilizableLoad) {
  TempDir dir;
  auto j = small_experiment();
  j["alphas"] = {0.5, 1.0};
  j["horizon"] = 50;
  std::ostringstream log;
  run_experiment(parse_experiment(j), 1, log);
  EXPECT_NE(log.str().find("alpha = 1 is not stabilizable"), std::string::npos) << log.str();
}

TEST(Experiment, BundledConfigsParse) {
  for (const char* name : {"fig51a.json", "fig51b.json", "tandem2-sweep.json"}) {
    const auto cfg = load_experiment((kConfigs / name).string());
    EXPECT_FALSE(cfg.policies.empty());
  }
  const auto a = load_experiment((kConfigs / "fig51a.json").string());
  EXPECT_EQ(a.network.name, "fig1-loop");
  EXPECT_EQ(a.alphas.size(), 9u);
  EXPECT_EQ(a.seeds.size(), 10u);
  EXPECT_EQ(a.horizon, 10000u);
  const auto b = load_experiment((kConfigs / "fig51b.json").string());
  EXPECT_EQ(std::get<LinearCost>(b.cost.kind()).c, (std::vector<double>{1, 1, 1, 1, 5}));
}

TEST(Experiment, SimulationMatchesSweepCell) {
  const auto cfg = parse_experiment(small_experiment());
  const auto sim = run_simulation(cfg, 1, 0.6, 2, true);
  const auto rows = sweep(make_sweep_grid(cfg));
  const auto it = std::find_if(rows.begin(), rows.end(),
                               [](const SweepRow& r) { return r.policy == "mup" && r.alpha == 0.6 && r.seed == 2; });
  ASSERT_NE(it, rows.end());
  EXPECT_EQ(it->metrics, sim.metrics);
  std::ostringstream os;
  io::write_trace_csv(os, sim.trace, 2, 2);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,q_1,q_2,u_1,u_2,cost");
}

TEST(Check, BundledTandemFields) {
  const auto bad = run_check(parse_check_config(io::read_json_file((kConfigs / "tandem-exp-field.json").string())), "cor42");
  EXPECT_FALSE(bad.passed);
  EXPECT_FALSE(bad.counterexamples.empty());
  const auto good =
      run_check(parse_check_config(io::read_json_file((kConfigs / "tandem-modified-field.json").string())), "cor42");
  EXPECT_TRUE(good.passed);
  const auto j = io::report_to_json(bad);
  EXPECT_EQ(j["check"], "cor42");
  EXPECT_EQ(j["passed"], false);
  EXPECT_TRUE(j["witness_threshold"].is_null());
  EXPECT_FALSE(j["counterexamples"].empty());
}

TEST(Check, UnknownName) {
  CheckConfig cfg;
  EXPECT_EQ(code_of([&] { run_check(cfg, "bogus"); }), ErrorCode::UnknownCheck);
  EXPECT_EQ(code_of([&] { run_check(cfg, "cor42"); }), ErrorCode::ConfigParseError);
}

TEST(Check, DpFromConfig) {
  const auto j = io::json::parse(R"({
    "network": "tandem2", "field": {"kind": "MaxWeight"},
    "cost": {"kind": "linear", "c": [0.375, 0.375]}, "states": [[3, 1], [0, 0]]})");
  EXPECT_TRUE(run_check(parse_check_config(j), "dp").passed);
}

TEST(Listing, NamesAndJson) {
  const auto entries = list_examples(kConfigs);
  std::ostringstream os;
  write_examples_text(os, entries);
  EXPECT_NE(os.str().find("fig1-loop"), std::string::npos);
  EXPECT_NE(os.str().find("tandem2"), std::string::npos);
  EXPECT_NE(os.str().find("fig51a.json"), std::string::npos);
  const auto names = examples_json(entries);
  EXPECT_TRUE(names.is_array());
  EXPECT_NE(std::find(names.begin(), names.end(), "fig1-loop"), names.end());
}

TEST(Csv, NumbersRoundTrip) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> U(-1e6, 1e6);
  for (int k = 0; k < 10000; ++k) {
    const double v = k % 2 ? U(gen) : U(gen) * 1e-9;
    EXPECT_EQ(std::strtod(io::format_double(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(3.0), "3");
}
