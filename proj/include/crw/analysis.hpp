#ifndef CRW_ANALYSIS_HPP
#define CRW_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "crw/error.hpp"
#include "crw/fields.hpp"
#include "crw/lp.hpp"
#include "crw/model.hpp"
#include "crw/policy.hpp"
#include "crw/rng.hpp"
#include "crw/sim.hpp"

namespace crw {

// Sampled audits of the sufficient stability conditions. None of these is a
// proof: each evaluates a condition on finite l1-shells and reports the
// smallest sampled radius above which it held, plus counterexamples.

struct SampleSpec {
  std::vector<double> shell_radii{1e2, 1e3, 1e4};
  std::size_t points_per_shell = 512;
  // Per coordinate i: points on the face x_i = 0 and points with
  // 0 < x_i < small_coord_bound.
  std::size_t face_points = 32;
  std::size_t perturbations_per_point = 4;
  double delta_norm_bound = 10.0;   // C1, l-infinity radius of dx
  double small_coord_bound = 10.0;  // C2
  std::uint64_t rng_seed = 1;
  std::size_t dimension = 0;  // 0: take it from the field

  void validate() const {
    if (shell_radii.empty()) throw Error(ErrorCode::InvalidParams, "no shell radii");
    for (std::size_t k = 0; k < shell_radii.size(); ++k) {
      if (!(shell_radii[k] > 0.0)) throw Error(ErrorCode::InvalidParams, "shell radii must be positive");
      if (k > 0 && !(shell_radii[k] > shell_radii[k - 1]))
        throw Error(ErrorCode::InvalidParams, "shell radii must be strictly increasing");
    }
    if (points_per_shell == 0 || perturbations_per_point == 0)
      throw Error(ErrorCode::InvalidParams, "sample counts must be positive");
    if (!(delta_norm_bound > 0.0) || !(small_coord_bound > 0.0))
      throw Error(ErrorCode::InvalidParams, "C1 and C2 must be positive");
  }
};

struct Counterexample {
  std::vector<double> state;
  std::vector<double> perturbation;
  std::size_t coordinate = 0;
  double value = 0.0;
  double radius = 0.0;
};

struct ShellSummary {
  double radius = 0.0;
  double max_value = 0.0;
  std::size_t samples = 0;
};

struct CheckReport {
  std::string check;
  bool passed = false;
  std::optional<double> witness_threshold;
  double worst_violation = 0.0;
  std::vector<Counterexample> counterexamples;
  std::vector<ShellSummary> shells;
  std::map<std::string, double> diagnostics;
};

inline constexpr std::size_t kMaxCounterexamples = 20;

namespace detail {

// Tag for one sampled state on a shell.
enum class PointKind { Bulk, Face, NearFace };

struct ShellPoint {
  std::vector<double> x;
  PointKind kind = PointKind::Bulk;
  std::size_t coordinate = 0;  // for Face/NearFace
  std::uint64_t slot = 0;      // RNG slot, reused for perturbations
};

inline std::size_t resolve_dimension(const SampleSpec& sample, const SchedulingField& field) {
  if (sample.dimension != 0) {
    if (field.dimension() != 0 && field.dimension() != sample.dimension)
      throw Error(ErrorCode::DimensionMismatch, "sample dimension differs from field dimension");
    return sample.dimension;
  }
  if (field.dimension() == 0)
    throw Error(ErrorCode::InvalidParams, "field has no fixed dimension; set SampleSpec::dimension");
  return field.dimension();
}

// Uniform point on {x >= 0, sum x = total} over the coordinates in `free`.
inline void dirichlet_fill(std::vector<double>& x, const std::vector<std::size_t>& free, double total,
                           const CounterRng& rng, std::uint64_t slot) {
  const std::uint32_t stream = stream_id(StreamKind::Sampling, 0);
  double sum = 0.0;
  std::vector<double> e(free.size());
  for (std::size_t k = 0; k < free.size(); ++k) {
    e[k] = -std::log1p(-rng.uniform(slot, stream, static_cast<std::uint32_t>(k)));
    sum += e[k];
  }
  for (std::size_t k = 0; k < free.size(); ++k) x[free[k]] = sum > 0.0 ? total * e[k] / sum : total / free.size();
}

inline std::vector<ShellPoint> shell_points(const SampleSpec& sample, std::size_t m, std::size_t shell_index) {
  const CounterRng rng(sample.rng_seed);
  const double radius = sample.shell_radii[shell_index];
  std::vector<ShellPoint> points;
  std::uint64_t counter = 0;
  auto next_slot = [&] { return (static_cast<std::uint64_t>(shell_index) << 40) | counter++; };
  std::vector<std::size_t> all(m);
  for (std::size_t i = 0; i < m; ++i) all[i] = i;

  for (std::size_t k = 0; k < sample.points_per_shell; ++k) {
    ShellPoint p{std::vector<double>(m, 0.0), PointKind::Bulk, 0, next_slot()};
    dirichlet_fill(p.x, all, radius, rng, p.slot);
    points.push_back(std::move(p));
  }
  if (m < 2) return points;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) others.push_back(j);
    for (std::size_t k = 0; k < sample.face_points; ++k) {
      ShellPoint p{std::vector<double>(m, 0.0), PointKind::Face, i, next_slot()};
      dirichlet_fill(p.x, others, radius, rng, p.slot);
      points.push_back(std::move(p));
    }
    for (std::size_t k = 0; k < sample.face_points; ++k) {
      ShellPoint p{std::vector<double>(m, 0.0), PointKind::NearFace, i, next_slot()};
      const double small =
          std::min(sample.small_coord_bound, radius) * rng.uniform(p.slot, stream_id(StreamKind::Sampling, 1));
      p.x[i] = small;
      dirichlet_fill(p.x, others, radius - small, rng, p.slot);
      points.push_back(std::move(p));
    }
  }
  return points;
}

inline double l1(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += std::abs(e);
  return s;
}

inline double l2(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

// Collects per-shell maxima and violations of `measure <= eps`, then
// finds the smallest sampled radius above which every shell complied.
class ShellAudit {
 public:
  ShellAudit(std::string name, const SampleSpec& sample, double eps) : eps_(eps) {
    report_.check = std::move(name);
    for (double r : sample.shell_radii) report_.shells.push_back({r, 0.0, 0});
  }

  void record(std::size_t shell, std::span<const double> x, std::span<const double> dx, std::size_t coordinate,
              double value) {
    auto& s = report_.shells[shell];
    ++s.samples;
    if (value > s.max_value || std::isnan(value)) s.max_value = std::isnan(value) ? inf() : value;
    if (!(value <= eps_)) {
      violations_.push_back({std::vector<double>(x.begin(), x.end()), std::vector<double>(dx.begin(), dx.end()),
                             coordinate, std::isnan(value) ? inf() : value, s.radius});
    }
  }

  /// A violation that fails the check regardless of radius.
  void record_hard(std::span<const double> x, std::size_t coordinate, double value, double radius) {
    hard_failure_ = true;
    violations_.push_back({std::vector<double>(x.begin(), x.end()), {}, coordinate, value, radius});
  }

  CheckReport finish() {
    std::optional<double> witness;
    for (std::size_t k = report_.shells.size(); k-- > 0;) {
      if (report_.shells[k].max_value <= eps_)
        witness = report_.shells[k].radius;
      else
        break;
    }
    report_.passed = witness.has_value() && !hard_failure_;
    report_.witness_threshold = report_.passed ? witness : std::nullopt;
    double worst = 0.0;
    for (const auto& s : report_.shells) worst = std::max(worst, s.max_value - eps_);
    for (const auto& v : violations_) worst = std::max(worst, std::isinf(v.value) ? inf() : v.value - eps_);
    report_.worst_violation = std::max(0.0, worst);
    std::stable_sort(violations_.begin(), violations_.end(),
                     [](const Counterexample& a, const Counterexample& b) { return a.value > b.value; });
    if (violations_.size() > kMaxCounterexamples) violations_.resize(kMaxCounterexamples);
    report_.counterexamples = std::move(violations_);
    report_.diagnostics["eps"] = eps_;
    return std::move(report_);
  }

  CheckReport& report() { return report_; }

 private:
  static double inf() { return std::numeric_limits<double>::infinity(); }

  double eps_;
  bool hard_failure_ = false;
  CheckReport report_;
  std::vector<Counterexample> violations_;
};

}  // namespace detail

/// Slow variation of the normalized field: max_i |mubar_i(x + dx) - mubar_i(x)|
/// over dx in the l-infinity ball of radius C1 (kept inside the orthant),
/// bounded by eps1 beyond some sampled radius B1.
inline CheckReport check_thm41_cond1(const SchedulingField& field, double eps1, const SampleSpec& sample = {}) {
  if (!(eps1 > 0.0 && eps1 < 1.0)) throw Error(ErrorCode::InvalidParams, "eps1 must lie in (0, 1)");
  sample.validate();
  const std::size_t m = detail::resolve_dimension(sample, field);
  const CounterRng rng(sample.rng_seed);
  detail::ShellAudit audit("thm41-1", sample, eps1);
  for (std::size_t s = 0; s < sample.shell_radii.size(); ++s) {
    for (const auto& p : detail::shell_points(sample, m, s)) {
      const auto base = normalize_weights(field(p.x));
      double worst = 0.0;
      std::vector<double> worst_dx(m, 0.0);
      std::size_t worst_i = 0;
      for (std::size_t k = 0; k < sample.perturbations_per_point; ++k) {
        std::vector<double> dx(m), y(m);
        for (std::size_t i = 0; i < m; ++i) {
          const double u = rng.uniform(p.slot, stream_id(StreamKind::Sampling, 2 + static_cast<std::uint32_t>(k)),
                                       static_cast<std::uint32_t>(i));
          dx[i] = std::max(sample.delta_norm_bound * (2.0 * u - 1.0), -p.x[i]);
          y[i] = p.x[i] + dx[i];
        }
        const auto moved = normalize_weights(field(y));
        for (std::size_t i = 0; i < m; ++i) {
          const double d = std::abs(moved[i] - base[i]);
          if (d > worst) {
            worst = d;
            worst_dx = dx;
            worst_i = i;
          }
        }
      }
      audit.record(s, p.x, worst_dx, worst_i, worst);
    }
  }
  return audit.finish();
}

/// Small coordinates carry small normalized weight: mubar_i(x) <= eps2
/// whenever x_i < C2, beyond some sampled radius B2.
inline CheckReport check_thm41_cond2(const SchedulingField& field, double eps2, const SampleSpec& sample = {}) {
  if (!(eps2 > 0.0 && eps2 < 1.0)) throw Error(ErrorCode::InvalidParams, "eps2 must lie in (0, 1)");
  sample.validate();
  const std::size_t m = detail::resolve_dimension(sample, field);
  detail::ShellAudit audit("thm41-2", sample, eps2);
  for (std::size_t s = 0; s < sample.shell_radii.size(); ++s) {
    for (const auto& p : detail::shell_points(sample, m, s)) {
      const auto bar = normalize_weights(field(p.x));
      for (std::size_t i = 0; i < m; ++i)
        if (p.x[i] < sample.small_coord_bound) audit.record(s, p.x, {}, i, bar[i]);
    }
  }
  return audit.finish();
}

/// Log-gradient condition and zero-on-face condition for fields mu = grad h.
///
/// Condition 1 is measured as mubar_i(x) * ||grad log mu_i(x)||_2, which
/// equals ||grad mu_i||_2 / ||mu||_1. This is the quantity that controls how
/// fast the normalized field turns, and it stays finite on the faces where
/// mu_i vanishes. The unweighted log-gradient maximum is reported in
/// diagnostics["max_raw_log_gradient"] for reference.
/// Condition 2 is exact: mu_i(x) == 0 on every sampled face x_i = 0.
/// An interior state with mu_i == 0 fails strict positivity.
inline CheckReport check_cor42(const SchedulingField& field, double eps, const SampleSpec& sample = {}) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidParams, "eps must be positive");
  sample.validate();
  const std::size_t m = detail::resolve_dimension(sample, field);
  detail::ShellAudit audit("cor42", sample, eps);
  double raw_log_max = 0.0;
  double face_violations = 0.0, positivity_violations = 0.0;
  for (std::size_t s = 0; s < sample.shell_radii.size(); ++s) {
    const double radius = sample.shell_radii[s];
    for (const auto& p : detail::shell_points(sample, m, s)) {
      const auto mu = field(p.x);
      const double norm = detail::l1(mu);
      if (norm == 0.0) continue;
      const auto jac = field_jacobian(field, p.x);
      const bool interior = std::all_of(p.x.begin(), p.x.end(), [](double v) { return v > 0.0; });
      for (std::size_t i = 0; i < m; ++i) {
        if (p.x[i] == 0.0 && mu[i] != 0.0) {
          audit.record_hard(p.x, i, std::abs(mu[i]), radius);
          face_violations += 1.0;
        }
        if (interior && !(mu[i] > 0.0)) {
          audit.record_hard(p.x, i, std::numeric_limits<double>::infinity(), radius);
          positivity_violations += 1.0;
          continue;
        }
        const double gnorm = detail::l2(jac[i]);
        if (mu[i] > 0.0) raw_log_max = std::max(raw_log_max, gnorm / mu[i]);
        audit.record(s, p.x, {}, i, gnorm / norm);
      }
    }
  }
  auto report = audit.finish();
  report.diagnostics["max_raw_log_gradient"] = raw_log_max;
  report.diagnostics["face_violations"] = face_violations;
  report.diagnostics["positivity_violations"] = positivity_violations;
  return report;
}

/// ||grad mu_i(x)||_2 <= eps ||mu(x)||_2 beyond some sampled radius.
/// Informational: a weaker, conjectured sufficient condition.
inline CheckReport check_remark3(const SchedulingField& field, double eps, const SampleSpec& sample = {}) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidParams, "eps must be positive");
  sample.validate();
  const std::size_t m = detail::resolve_dimension(sample, field);
  detail::ShellAudit audit("remark3", sample, eps);
  for (std::size_t s = 0; s < sample.shell_radii.size(); ++s) {
    for (const auto& p : detail::shell_points(sample, m, s)) {
      const auto mu = field(p.x);
      const double norm = detail::l2(mu);
      if (norm == 0.0) continue;
      const auto jac = field_jacobian(field, p.x);
      for (std::size_t i = 0; i < m; ++i) audit.record(s, p.x, {}, i, detail::l2(jac[i]) / norm);
    }
  }
  auto report = audit.finish();
  report.diagnostics["informational"] = 1.0;
  return report;
}

// ---------------------------------------------------------------------------

enum class Perturbation { Exp, Log };

struct Cor43Options {
  double theta = 1.0;
  std::vector<double> ray_points{1e2, 1e3, 1e4, 1e5};
  double lipschitz_step = 1e-3;
  double lipschitz_tolerance = 0.05;  // relative agreement of the two step sizes
  double growth_ratio = 1.5;
};

/// Simple-perturbation conditions for mu = grad h0(x~), audited along the
/// ray t e_i for each coordinate:
///   lipschitz  dx~/dx and dh0/dx~_i have finite-difference slopes that agree
///              for steps h and h/10 within 5%
///   growth     dx~/dx increases across every sampled decade, and the
///              per-decade increment never shrinks by more than growth_ratio
///              (at least logarithmic divergence)
///   ratio      dh0/dx~_i (x~) >= (dx~/dx)^(1+eps) at the last three ray points
inline CheckReport check_cor43(const CostFunction& h0, Perturbation perturbation, double eps,
                               const Cor43Options& options = {}) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidParams, "eps must be positive");
  if (options.ray_points.size() < 3) throw Error(ErrorCode::InvalidParams, "need at least three ray points");
  const std::size_t m = h0.dimension();
  if (m == 0) throw Error(ErrorCode::GradientUnavailable, "cost has no coordinates");
  const double theta = options.theta;
  if (perturbation == Perturbation::Exp && !(theta >= 1.0))
    throw Error(ErrorCode::InvalidParams, "exponential perturbation needs theta >= 1");

  auto perturb = [&](double t) {
    return perturbation == Perturbation::Exp ? exp_perturb(t, theta) : log_perturb(t, theta);
  };
  auto slope = [&](double t) {
    return perturbation == Perturbation::Exp ? exp_perturb_derivative(t, theta) : log_perturb_derivative(t, theta);
  };
  auto h0_partial = [&](std::size_t i, double y) {
    std::vector<double> v(m, 0.0);
    v[i] = y;
    return h0.h0_gradient(v)[i];
  };
  auto max_slope = [&](const std::function<double(double)>& f, double h) {
    std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
    for (double t : options.ray_points) grid.push_back(t);
    double best = 0.0;
    for (double t : grid) best = std::max(best, std::abs(f(t + h) - f(t)) / h);
    return best;
  };
  auto stable = [&](double a, double b) {
    return std::isfinite(a) && std::isfinite(b) &&
           std::abs(a - b) <= options.lipschitz_tolerance * std::max(std::abs(a), std::abs(b)) + 1e-9;
  };

  CheckReport report;
  report.check = "cor43";
  bool lipschitz_ok = true, growth_ok = true, ratio_ok = true;
  double min_ratio = std::numeric_limits<double>::infinity();
  const double h = options.lipschitz_step;

  const double s1 = max_slope(slope, h), s2 = max_slope(slope, h / 10);
  if (!stable(s1, s2)) lipschitz_ok = false;
  report.diagnostics["perturbation_slope_bound"] = s2;

  const auto& rays = options.ray_points;
  std::vector<double> d(rays.size());
  for (std::size_t k = 0; k < rays.size(); ++k) d[k] = slope(rays[k]);
  for (std::size_t k = 1; k < rays.size(); ++k) {
    const double inc = d[k] - d[k - 1];
    if (!(inc > 0.0)) growth_ok = false;
    if (k >= 2) {
      const double prev = d[k - 1] - d[k - 2];
      if (prev > 0.0 && inc * options.growth_ratio < prev) growth_ok = false;
    }
  }
  if (!growth_ok) report.counterexamples.push_back({{rays.back()}, {}, 0, d.back(), rays.back()});
  report.diagnostics["perturbation_derivative_at_last_ray_point"] = d.back();

  for (std::size_t i = 0; i < m; ++i) {
    const auto g = [&](double y) { return h0_partial(i, y); };
    const double a = max_slope(g, h), b = max_slope(g, h / 10);
    if (!stable(a, b)) lipschitz_ok = false;
    for (std::size_t k = rays.size() - 3; k < rays.size(); ++k) {
      const double t = rays[k];
      const double r = h0_partial(i, perturb(t)) / std::pow(slope(t), 1.0 + eps);
      min_ratio = std::min(min_ratio, r);
      if (!(r >= 1.0)) {
        ratio_ok = false;
        std::vector<double> state(m, 0.0);
        state[i] = t;
        report.counterexamples.push_back({state, {}, i, r, t});
      }
    }
  }
  report.diagnostics["lipschitz"] = lipschitz_ok ? 1.0 : 0.0;
  report.diagnostics["growth"] = growth_ok ? 1.0 : 0.0;
  report.diagnostics["ratio"] = ratio_ok ? 1.0 : 0.0;
  report.diagnostics["min_ratio"] = min_ratio;
  report.diagnostics["eps"] = eps;
  report.passed = lipschitz_ok && growth_ok && ratio_ok;
  report.witness_threshold = report.passed ? std::optional<double>(rays[rays.size() - 3]) : std::nullopt;
  report.worst_violation = std::isfinite(min_ratio) ? std::max(0.0, 1.0 - min_ratio) : 0.0;
  if (!growth_ok) report.worst_violation = std::max(report.worst_violation, 1.0);
  if (report.counterexamples.size() > kMaxCounterexamples) report.counterexamples.resize(kMaxCounterexamples);
  return report;
}

// ---------------------------------------------------------------------------

/// min over the relaxed region U(x) of <g, Bu + alpha>, by LP.
inline double relaxed_region_minimum(std::span<const double> g, const ValidatedNetwork& net, const QueueState& x) {
  const auto& spec = net.spec();
  const std::size_t m = net.m(), l = net.l(), lm = spec.C.rows();
  std::vector<std::size_t> empty;
  for (std::size_t i = 0; i < m; ++i)
    if (x[i] == 0) empty.push_back(i);
  Matrix<double> A(l + lm + empty.size(), l);
  std::vector<double> b(A.rows(), 1.0);
  std::size_t r = 0;
  for (std::size_t j = 0; j < l; ++j, ++r) A(r, j) = 1.0;
  for (std::size_t k = 0; k < lm; ++k, ++r)
    for (std::size_t j = 0; j < l; ++j) A(r, j) = spec.C(k, j);
  for (std::size_t i : empty) {
    for (std::size_t j = 0; j < l; ++j) A(r, j) = -spec.B(i, j);
    b[r++] = spec.alpha[i];
  }
  std::vector<double> c(l, 0.0);
  double constant = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    constant += g[i] * spec.alpha[i];
    for (std::size_t j = 0; j < l; ++j) c[j] -= g[i] * spec.B(i, j);
  }
  const auto res = lp::maximize(A, b, c);
  if (res.status != lp::Status::Optimal)
    throw Error(ErrorCode::LpFailure, std::string("region LP ") + std::string(lp::to_string(res.status)));
  return constant - res.objective;
}

/// min_{u in U(x)} <grad h(x), Bu + alpha> <= -c(x) at every listed state.
/// Reports the largest margin min + c(x) as worst_violation.
inline CheckReport check_dp_inequality(const SchedulingField& gradient, const CostFunction& cost,
                                       const ValidatedNetwork& net, std::span<const QueueState> states) {
  if (states.empty()) throw Error(ErrorCode::InvalidParams, "no states to check");
  CheckReport report;
  report.check = "dp";
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& x : states) {
    detail::check_state(net, x);
    const auto xr = x.as_real();
    const double min_value = relaxed_region_minimum(gradient(xr), net, x);
    const double c = cost(xr);
    const double margin = min_value + c;
    worst = std::max(worst, margin);
    if (margin > 1e-9 * std::max(1.0, std::abs(c))) report.counterexamples.push_back({xr, {}, 0, margin, 0.0});
  }
  std::stable_sort(report.counterexamples.begin(), report.counterexamples.end(),
                   [](const Counterexample& a, const Counterexample& b) { return a.value > b.value; });
  if (report.counterexamples.size() > kMaxCounterexamples) report.counterexamples.resize(kMaxCounterexamples);
  report.passed = report.counterexamples.empty();
  report.worst_violation = std::max(0.0, worst);
  report.diagnostics["max_margin"] = worst;
  return report;
}

// ---------------------------------------------------------------------------

struct DriftEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::uint64_t samples = 0;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Monte Carlo estimate of E{V(Q(t+1)) - V(x) | Q(t) = x} under the policy.
/// Sample k uses RNG slot k, so the estimate is a pure function of the seed.
inline DriftEstimate estimate_drift(const PolicyConfig& policy, const ValidatedNetwork& net, const QueueState& x,
                                    std::uint64_t n_samples, std::uint64_t seed, const ScalarFunction& V) {
  if (n_samples < 1) throw Error(ErrorCode::InvalidParams, "n_samples must be >= 1");
  const auto u = select_control(policy, net, x);
  const double v0 = V(x.as_real());
  const CounterRng rng(seed);
  double mean = 0.0, m2 = 0.0;
  for (std::uint64_t k = 0; k < n_samples; ++k) {
    const auto a = sample_arrivals(net.spec(), rng, k);
    const auto B = sample_service(net.spec(), rng, k);
    const auto out = step(net, x, u, a, B);
    const double d = V(out.next_state.as_real()) - v0;
    const double delta = d - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (d - mean);
  }
  DriftEstimate est;
  est.mean = mean;
  est.samples = n_samples;
  est.stderr_ = n_samples > 1 ? std::sqrt(m2 / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples)) : 0.0;
  return est;
}

/// Empirical eta_bar: max over states of drift(x) + c(x)/2, the constant
/// that makes drift <= -c/2 + eta_bar/2 ... hold on the sample when doubled.
inline double estimate_eta_bar(const PolicyConfig& policy, const ValidatedNetwork& net, const CostFunction& cost,
                               std::span<const QueueState> states, std::uint64_t n_samples, std::uint64_t seed,
                               const ScalarFunction& V) {
  double eta = -std::numeric_limits<double>::infinity();
  for (const auto& x : states) {
    const auto d = estimate_drift(policy, net, x, n_samples, seed, V);
    eta = std::max(eta, 2.0 * (d.mean + 0.5 * cost(x.as_real())));
  }
  return eta;
}

}  // namespace crw

#endif  // CRW_ANALYSIS_HPP
