#ifndef CRW_IO_HPP
#define CRW_IO_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crw/analysis.hpp"
#include "crw/error.hpp"
#include "crw/fields.hpp"
#include "crw/model.hpp"
#include "crw/sim.hpp"

namespace crw::io {

using json = nlohmann::json;

// Shortest of %.15g, %.16g, %.17g that reads back as the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '_' || c == '-'; }), s.end());
  return s;
}

[[noreturn]] inline void parse_error(const std::string& what) { throw Error(ErrorCode::ConfigParseError, what); }

template <class T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) parse_error(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    parse_error(std::string("key '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, key) : fallback;
}

inline IntMatrix int_matrix(const json& j, const char* key) {
  const auto rows = get<std::vector<std::vector<int>>>(j, key);
  if (rows.empty()) parse_error(std::string("'") + key + "' is empty");
  IntMatrix M(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != M.cols()) parse_error(std::string("'") + key + "' has ragged rows");
    for (std::size_t c = 0; c < M.cols(); ++c) M(r, c) = rows[r][c];
  }
  return M;
}

inline json matrix_json(const IntMatrix& M) {
  json rows = json::array();
  for (std::size_t r = 0; r < M.rows(); ++r) {
    auto row = M.row(r);
    rows.push_back(std::vector<int>(row.begin(), row.end()));
  }
  return rows;
}

}  // namespace detail

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::parse_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    detail::parse_error("'" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Enums

inline std::string to_json_name(ModelVariant v) { return v == ModelVariant::Truncated ? "Truncated" : "MeynRegion"; }
inline std::string to_json_name(ArrivalDist d) { return d == ArrivalDist::Bernoulli ? "Bernoulli" : "Poisson"; }
inline std::string to_json_name(ServiceDist d) { return d == ServiceDist::Deterministic ? "Deterministic" : "Bernoulli"; }

inline ModelVariant parse_variant(const std::string& s) {
  const auto k = detail::lower(s);
  if (k == "truncated") return ModelVariant::Truncated;
  if (k == "meynregion" || k == "region") return ModelVariant::MeynRegion;
  detail::parse_error("unknown variant '" + s + "'");
}

inline ArrivalDist parse_arrival(const std::string& s) {
  const auto k = detail::lower(s);
  if (k == "bernoulli") return ArrivalDist::Bernoulli;
  if (k == "poisson") return ArrivalDist::Poisson;
  detail::parse_error("unknown arrival_dist '" + s + "'");
}

inline ServiceDist parse_service(const std::string& s) {
  const auto k = detail::lower(s);
  if (k == "deterministic") return ServiceDist::Deterministic;
  if (k == "bernoulli") return ServiceDist::Bernoulli;
  detail::parse_error("unknown service_dist '" + s + "'");
}

// ---------------------------------------------------------------------------
// NetworkSpec: either a built-in name or an object with m, l, B, C, alpha, ...

inline NetworkSpec network_from_json(const json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    auto spec = builtin_network(name);
    if (!spec) detail::parse_error("unknown built-in network '" + name + "'");
    return *spec;
  }
  if (!j.is_object()) detail::parse_error("network must be a name or an object");
  NetworkSpec spec;
  if (j.contains("builtin")) {
    spec = network_from_json(j.at("builtin"));
    if (j.contains("alpha")) spec.alpha = detail::get<std::vector<double>>(j, "alpha");
  } else {
    spec.name = detail::get_or<std::string>(j, "name", "custom");
    spec.B = detail::int_matrix(j, "B");
    spec.C = detail::int_matrix(j, "C");
    spec.alpha = detail::get<std::vector<double>>(j, "alpha");
    if (j.contains("m") && detail::get<std::size_t>(j, "m") != spec.B.rows())
      throw Error(ErrorCode::DimensionMismatch, "'m' disagrees with the rows of B");
    if (j.contains("l") && detail::get<std::size_t>(j, "l") != spec.B.cols())
      throw Error(ErrorCode::DimensionMismatch, "'l' disagrees with the columns of B");
  }
  if (j.contains("variant")) spec.variant = parse_variant(detail::get<std::string>(j, "variant"));
  if (j.contains("arrival_dist")) spec.arrival_dist = parse_arrival(detail::get<std::string>(j, "arrival_dist"));
  if (j.contains("service_dist")) spec.service_dist = parse_service(detail::get<std::string>(j, "service_dist"));
  if (j.contains("service_success")) spec.service_success = detail::get<double>(j, "service_success");
  return spec;
}

inline json network_to_json(const NetworkSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["m"] = spec.m();
  j["l"] = spec.l();
  j["B"] = detail::matrix_json(spec.B);
  j["C"] = detail::matrix_json(spec.C);
  j["alpha"] = spec.alpha;
  j["variant"] = to_json_name(spec.variant);
  j["arrival_dist"] = to_json_name(spec.arrival_dist);
  j["service_dist"] = to_json_name(spec.service_dist);
  if (spec.service_dist == ServiceDist::Bernoulli) j["service_success"] = spec.service_success;
  return j;
}

// ---------------------------------------------------------------------------
// CostFunction: {"kind": "linear", "c": [...]}, {"kind": "quadratic", "d": [...]},
// {"kind": "tandem_fluid", "c1", "c2", "alpha1", "nu2"}

inline CostFunction cost_from_json(const json& j) {
  if (!j.is_object()) detail::parse_error("cost must be an object");
  const auto kind = detail::lower(detail::get<std::string>(j, "kind"));
  if (kind == "linear") return CostFunction::linear(detail::get<std::vector<double>>(j, "c"));
  if (kind == "quadratic" || kind == "quadraticdiag") return CostFunction::quadratic(detail::get<std::vector<double>>(j, "d"));
  if (kind == "tandemfluid")
    return CostFunction::tandem_fluid(detail::get<double>(j, "c1"), detail::get<double>(j, "c2"),
                                      detail::get<double>(j, "alpha1"), detail::get<double>(j, "nu2"));
  detail::parse_error("unknown cost kind '" + detail::get<std::string>(j, "kind") + "'");
}

inline json cost_to_json(const CostFunction& cost) {
  return std::visit(
      [](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, LinearCost>)
          return {{"kind", "linear"}, {"c", k.c}};
        else if constexpr (std::is_same_v<K, QuadraticDiagCost>)
          return {{"kind", "quadratic"}, {"d", k.d}};
        else
          return {{"kind", "tandem_fluid"}, {"c1", k.c1}, {"c2", k.c2}, {"alpha1", k.alpha1}, {"nu2", k.nu2}};
      },
      cost.kind());
}

// ---------------------------------------------------------------------------
// FieldSpec: {"kind", "theta", "cost", "D", "expr"}

inline FieldKind parse_field_kind(const std::string& s) {
  const auto k = detail::lower(s);
  if (k == "maxweight") return FieldKind::MaxWeight;
  if (k == "hmaxweightexp") return FieldKind::HMaxWeightExp;
  if (k == "hmaxweightlog") return FieldKind::HMaxWeightLog;
  if (k == "muptheta") return FieldKind::MuPTheta;
  if (k == "custom") return FieldKind::Custom;
  detail::parse_error("unknown field kind '" + s + "'");
}

/// `default_cost` fills in the cost for kinds that need one when the field
/// object omits it.
inline FieldSpec field_spec_from_json(const json& j, const std::optional<CostFunction>& default_cost = std::nullopt) {
  if (!j.is_object()) detail::parse_error("field must be an object");
  FieldSpec spec;
  spec.kind = parse_field_kind(detail::get<std::string>(j, "kind"));
  spec.theta = detail::get_or<double>(j, "theta", 1.0);
  if (j.contains("cost"))
    spec.cost = cost_from_json(j.at("cost"));
  else if (spec.kind != FieldKind::MaxWeight && spec.kind != FieldKind::Custom)
    spec.cost = default_cost;
  spec.D = detail::get_or<std::vector<double>>(j, "D", {});
  if (j.contains("expr")) {
    const auto& e = j.at("expr");
    spec.expressions = e.is_string() ? std::vector<std::string>{e.get<std::string>()} : detail::get<std::vector<std::string>>(j, "expr");
  }
  return spec;
}

inline json field_spec_to_json(const FieldSpec& spec) {
  json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["theta"] = spec.theta;
  if (spec.cost) j["cost"] = cost_to_json(*spec.cost);
  if (!spec.D.empty()) j["D"] = spec.D;
  if (!spec.expressions.empty()) j["expr"] = spec.expressions;
  return j;
}

// ---------------------------------------------------------------------------
// Check reports

inline json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);  // JSON has no infinities
}

inline json report_to_json(const CheckReport& r) {
  json j;
  j["check"] = r.check;
  j["passed"] = r.passed;
  j["witness_threshold"] = r.witness_threshold ? json(*r.witness_threshold) : json(nullptr);
  j["worst_violation"] = json_number(r.worst_violation);
  json cx = json::array();
  for (const auto& c : r.counterexamples) {
    json e{{"state", c.state}, {"coordinate", c.coordinate}, {"value", json_number(c.value)}, {"radius", c.radius}};
    if (!c.perturbation.empty()) e["perturbation"] = c.perturbation;
    cx.push_back(std::move(e));
  }
  j["counterexamples"] = std::move(cx);
  json shells = json::array();
  for (const auto& s : r.shells)
    shells.push_back({{"radius", s.radius}, {"max_value", json_number(s.max_value)}, {"samples", s.samples}});
  if (!shells.empty()) j["shells"] = std::move(shells);
  json diag = json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = json_number(v);
  j["diagnostics"] = std::move(diag);
  return j;
}

inline void write_report_table(std::ostream& os, const CheckReport& r) {
  os << "check            " << r.check << '\n'
     << "result           " << (r.passed ? "PASS" : "FAIL") << '\n'
     << "witness radius   " << (r.witness_threshold ? format_double(*r.witness_threshold) : std::string("-")) << '\n'
     << "worst violation  " << std::to_string(r.worst_violation) << '\n';
  if (!r.shells.empty()) {
    os << "\n  radius        max measured   samples\n";
    for (const auto& s : r.shells) {
      char line[96];
      std::snprintf(line, sizeof line, "  %-12g  %-13.6g  %zu\n", s.radius, s.max_value, s.samples);
      os << line;
    }
  }
  for (const auto& [k, v] : r.diagnostics) {
    char line[128];
    std::snprintf(line, sizeof line, "  %s = %.6g\n", k.c_str(), v);
    os << line;
  }
  if (!r.counterexamples.empty()) {
    os << "\ncounterexamples (" << r.counterexamples.size() << " shown)\n";
    for (const auto& c : r.counterexamples) {
      os << "  x = (";
      for (std::size_t i = 0; i < c.state.size(); ++i) os << (i ? ", " : "") << format_double(c.state[i]);
      os << ")  i = " << c.coordinate + 1 << "  value = " << format_double(c.value) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kSweepCsvHeader =
    "policy,alpha,seed,horizon,avg_cost,avg_backlog,max_backlog,idle_fraction,total_excess";

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    os << csv_field(r.policy) << ',' << format_double(r.alpha) << ',' << r.seed << ',' << m.horizon << ','
       << format_double(m.avg_cost) << ',' << format_double(m.avg_backlog) << ',' << m.max_backlog << ','
       << format_double(m.idle_fraction) << ',' << m.total_excess << '\n';
  }
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace, std::size_t m, std::size_t l) {
  os << 't';
  for (std::size_t i = 1; i <= m; ++i) os << ",q_" << i;
  for (std::size_t j = 1; j <= l; ++j) os << ",u_" << j;
  os << ",cost\n";
  for (const auto& row : trace) {
    os << row.t;
    for (auto v : row.q.q) os << ',' << v;
    for (auto v : row.u.u) os << ',' << v;
    os << ',' << format_double(row.cost) << '\n';
  }
}

inline json metrics_to_json(const SimMetrics& m) {
  return {{"horizon", m.horizon},       {"avg_cost", m.avg_cost},         {"avg_backlog", m.avg_backlog},
          {"max_backlog", m.max_backlog}, {"idle_fraction", m.idle_fraction}, {"total_excess", m.total_excess},
          {"seed", m.seed}};
}

}  // namespace crw::io

#endif  // CRW_IO_HPP
