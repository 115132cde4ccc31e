#ifndef CRW_MODEL_HPP
#define CRW_MODEL_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crw/error.hpp"
#include "crw/lp.hpp"
#include "crw/matrix.hpp"

namespace crw {

/// Which queueing law the network follows.
///  - Truncated:  Q(t+1) = [Q(t) + B(t+1)U(t)]^+ + A(t+1)
///  - MeynRegion: Q(t+1) = Q(t) + B(t+1)U(t) + A(t+1), with controls
///                restricted so that empty queues are never drained.
enum class ModelVariant { Truncated, MeynRegion };
enum class ArrivalDist { Bernoulli, Poisson };
enum class ServiceDist { Deterministic, Bernoulli };

/// Backlog vector, one non-negative integer per queue.
struct QueueState {
  std::vector<std::int64_t> q;

  QueueState() = default;
  explicit QueueState(std::size_t m) : q(m, 0) {}
  explicit QueueState(std::vector<std::int64_t> values) : q(std::move(values)) {}
  QueueState(std::initializer_list<std::int64_t> values) : q(values) {}

  std::size_t size() const noexcept { return q.size(); }
  std::int64_t operator[](std::size_t i) const { return q[i]; }
  std::int64_t& operator[](std::size_t i) { return q[i]; }

  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto v : q) s += v;
    return s;
  }
  bool is_empty() const {
    return std::all_of(q.begin(), q.end(), [](auto v) { return v == 0; });
  }
  std::vector<double> as_real() const { return {q.begin(), q.end()}; }

  friend bool operator==(const QueueState&, const QueueState&) = default;
};

/// Binary activity vector u with Cu <= 1.
struct Control {
  std::vector<int> u;

  Control() = default;
  explicit Control(std::size_t l) : u(l, 0) {}
  explicit Control(std::vector<int> bits) : u(std::move(bits)) {}
  Control(std::initializer_list<int> bits) : u(bits) {}

  std::size_t size() const noexcept { return u.size(); }
  int operator[](std::size_t j) const { return u[j]; }
  bool is_idle() const {
    return std::all_of(u.begin(), u.end(), [](int v) { return v == 0; });
  }

  friend bool operator==(const Control&, const Control&) = default;
  friend auto operator<=>(const Control&, const Control&) = default;
};

struct NetworkSpec {
  std::string name;
  IntMatrix B;  // m x l, mean of B(t)
  IntMatrix C;  // l_m x l, binary
  std::vector<double> alpha;
  ModelVariant variant = ModelVariant::Truncated;
  ArrivalDist arrival_dist = ArrivalDist::Bernoulli;
  ServiceDist service_dist = ServiceDist::Deterministic;
  // Per-activity success probability when service_dist is Bernoulli.
  double service_success = 1.0;

  std::size_t m() const noexcept { return B.rows(); }
  std::size_t l() const noexcept { return B.cols(); }
};

inline constexpr std::size_t kDefaultEnumerationCap = 20;

/// Feasible binary controls u in {0,1}^l with Cu <= 1, in lexicographic
/// order (u_1 most significant). The order is what makes tie-breaking in
/// the policy deterministic.
inline std::vector<Control> feasible_controls(const NetworkSpec& spec,
                                              std::size_t cap = kDefaultEnumerationCap) {
  const std::size_t l = spec.l();
  if (l > cap || l >= 63)
    throw Error(ErrorCode::TooManyControls,
                "l = " + std::to_string(l) + " exceeds enumeration cap " + std::to_string(cap));
  // Bit (l-1-j) of a code is u_j, so increasing codes are lexicographic.
  std::vector<std::uint64_t> row_masks;
  for (std::size_t r = 0; r < spec.C.rows(); ++r) {
    std::uint64_t mask = 0;
    for (std::size_t j = 0; j < l; ++j)
      if (spec.C(r, j) != 0) mask |= std::uint64_t{1} << (l - 1 - j);
    row_masks.push_back(mask);
  }
  std::vector<Control> out;
  const std::uint64_t limit = std::uint64_t{1} << l;
  for (std::uint64_t code = 0; code < limit; ++code) {
    const bool ok = std::all_of(row_masks.begin(), row_masks.end(),
                                [code](std::uint64_t mask) { return std::popcount(code & mask) <= 1; });
    if (!ok) continue;
    Control u(l);
    for (std::size_t j = 0; j < l; ++j) u.u[j] = static_cast<int>((code >> (l - 1 - j)) & 1u);
    out.push_back(std::move(u));
  }
  return out;
}

/// A NetworkSpec that passed validation, with its feasible control set and
/// the per-control drift Bu precomputed. Immutable and cheap to copy.
class ValidatedNetwork {
 public:
  const NetworkSpec& spec() const noexcept { return *spec_; }
  std::size_t m() const noexcept { return spec_->m(); }
  std::size_t l() const noexcept { return spec_->l(); }

  bool has_controls() const noexcept { return controls_ != nullptr; }

  const std::vector<Control>& controls() const {
    if (!controls_)
      throw Error(ErrorCode::TooManyControls, "network too large for control enumeration; use the LP path");
    return *controls_;
  }

  /// Bu for controls()[k].
  const std::vector<std::vector<int>>& control_drifts() const {
    controls();
    return *drifts_;
  }

  std::vector<int> drift(const Control& u) const {
    std::vector<int> out(m(), 0);
    for (std::size_t i = 0; i < m(); ++i)
      for (std::size_t j = 0; j < l(); ++j) out[i] += spec_->B(i, j) * u[j];
    return out;
  }

  /// Same topology, different arrival rates.
  ValidatedNetwork with_alpha(std::vector<double> alpha) const;

 private:
  friend ValidatedNetwork validate_network(NetworkSpec spec, std::size_t cap);
  ValidatedNetwork() = default;

  std::shared_ptr<const NetworkSpec> spec_;
  std::shared_ptr<const std::vector<Control>> controls_;
  std::shared_ptr<const std::vector<std::vector<int>>> drifts_;
};

namespace detail {

inline void check_rates(const NetworkSpec& spec) {
  for (std::size_t i = 0; i < spec.alpha.size(); ++i) {
    const double a = spec.alpha[i];
    if (!(a >= 0.0) || !std::isfinite(a))
      throw Error(ErrorCode::NegativeRate, "alpha[" + std::to_string(i) + "] = " + std::to_string(a));
    if (spec.arrival_dist == ArrivalDist::Bernoulli && a > 1.0)
      throw Error(ErrorCode::InvalidRate,
                  "Bernoulli arrivals need alpha <= 1, got alpha[" + std::to_string(i) + "] = " + std::to_string(a));
  }
}

}  // namespace detail

inline ValidatedNetwork validate_network(NetworkSpec spec, std::size_t cap = kDefaultEnumerationCap) {
  if (spec.m() == 0 || spec.l() == 0) throw Error(ErrorCode::DimensionMismatch, "B must be non-empty");
  if (spec.C.cols() != spec.l())
    throw Error(ErrorCode::DimensionMismatch, "C has " + std::to_string(spec.C.cols()) + " columns, B has " +
                                                  std::to_string(spec.l()));
  if (spec.C.rows() == 0) throw Error(ErrorCode::DimensionMismatch, "C needs at least one constraint row");
  if (spec.alpha.size() != spec.m())
    throw Error(ErrorCode::DimensionMismatch, "alpha has length " + std::to_string(spec.alpha.size()) +
                                                  ", expected m = " + std::to_string(spec.m()));
  for (int v : spec.C.data())
    if (v != 0 && v != 1) throw Error(ErrorCode::NonBinaryConstituency, "C entry " + std::to_string(v));
  detail::check_rates(spec);
  if (!(spec.service_success > 0.0 && spec.service_success <= 1.0))
    throw Error(ErrorCode::InvalidParams, "service_success must lie in (0, 1]");

  ValidatedNetwork net;
  auto owned = std::make_shared<const NetworkSpec>(std::move(spec));
  net.spec_ = owned;
  if (owned->l() <= cap) {
    auto controls = std::make_shared<std::vector<Control>>(feasible_controls(*owned, cap));
    auto drifts = std::make_shared<std::vector<std::vector<int>>>();
    drifts->reserve(controls->size());
    for (const auto& u : *controls) drifts->push_back(net.drift(u));
    net.controls_ = std::move(controls);
    net.drifts_ = std::move(drifts);
  }
  return net;
}

inline ValidatedNetwork ValidatedNetwork::with_alpha(std::vector<double> alpha) const {
  if (alpha.size() != m()) throw Error(ErrorCode::DimensionMismatch, "alpha length");
  NetworkSpec copy = *spec_;
  copy.alpha = std::move(alpha);
  detail::check_rates(copy);
  ValidatedNetwork net = *this;
  net.spec_ = std::make_shared<const NetworkSpec>(std::move(copy));
  return net;
}

/// Margin below which a network is reported as not stabilizable.
inline constexpr double kStabilizabilityTolerance = 1e-9;

struct StabilizabilityReport {
  bool stabilizable = false;
  double margin = 0.0;
  std::vector<double> witness_u;
};

/// max delta  s.t.  u in [0,1]^l,  Cu <= 1,  Bu + alpha <= -delta * 1.
/// A positive optimum puts 0 in the interior of the velocity set.
inline StabilizabilityReport check_stabilizable(const ValidatedNetwork& net) {
  const auto& spec = net.spec();
  const std::size_t m = spec.m(), l = spec.l(), lm = spec.C.rows();
  // Variables: u_1..u_l, delta_plus, delta_minus.
  const std::size_t nv = l + 2;
  Matrix<double> A(l + lm + m, nv);
  std::vector<double> b(l + lm + m, 0.0);
  std::size_t r = 0;
  for (std::size_t j = 0; j < l; ++j, ++r) {
    A(r, j) = 1.0;
    b[r] = 1.0;
  }
  for (std::size_t k = 0; k < lm; ++k, ++r) {
    for (std::size_t j = 0; j < l; ++j) A(r, j) = spec.C(k, j);
    b[r] = 1.0;
  }
  for (std::size_t i = 0; i < m; ++i, ++r) {
    for (std::size_t j = 0; j < l; ++j) A(r, j) = spec.B(i, j);
    A(r, l) = 1.0;
    A(r, l + 1) = -1.0;
    b[r] = -spec.alpha[i];
  }
  std::vector<double> c(nv, 0.0);
  c[l] = 1.0;
  c[l + 1] = -1.0;
  const auto res = lp::maximize(A, b, c);
  // u = 0, delta = -max(alpha) is always feasible and delta is bounded above.
  if (res.status != lp::Status::Optimal)
    throw Error(ErrorCode::LpFailure, std::string("stabilizability LP ") + std::string(lp::to_string(res.status)));
  StabilizabilityReport report;
  report.margin = res.objective;
  report.witness_u.assign(res.x.begin(), res.x.begin() + static_cast<long>(l));
  report.stabilizable = report.margin > kStabilizabilityTolerance;
  return report;
}

/// Weights lambda over net.controls() with sum lambda = 1 and
/// sum lambda_k u_k = target; nullopt when target is outside their hull.
inline std::optional<std::vector<double>> convex_decomposition(const ValidatedNetwork& net,
                                                               std::span<const double> target) {
  const auto& controls = net.controls();
  const std::size_t l = net.l(), n = controls.size();
  if (target.size() != l) throw Error(ErrorCode::DimensionMismatch, "target length");
  // Equalities as paired inequalities: l coordinates plus the simplex row.
  Matrix<double> A(2 * (l + 1), n);
  std::vector<double> b(2 * (l + 1));
  for (std::size_t j = 0; j <= l; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const double v = j < l ? controls[k][j] : 1.0;
      A(2 * j, k) = v;
      A(2 * j + 1, k) = -v;
    }
    const double t = j < l ? target[j] : 1.0;
    b[2 * j] = t;
    b[2 * j + 1] = -t;
  }
  std::vector<double> c(n, 0.0);
  const auto res = lp::maximize(A, b, c);
  if (res.status != lp::Status::Optimal) return std::nullopt;
  return res.x;
}

// Built-in networks.

/// Five-queue network with a reverse loop: traffic enters at queue 1 and
/// leaves from queue 4; queue 3 routes either to queue 4 or into the loop
/// via queue 5 (u3 + u4 <= 1). Stabilizable iff alpha < 1.
inline NetworkSpec fig1_loop(double alpha = 0.5) {
  NetworkSpec s;
  s.name = "fig1-loop";
  s.B = IntMatrix{{-1, 0, 0, 0, 0, 0},
                  {1, -1, 0, 0, 1, 0},
                  {0, 1, -1, -1, 0, 0},
                  {0, 0, 1, 0, 0, -1},
                  {0, 0, 0, 1, -1, 0}};
  s.C = IntMatrix{{1, 0, 0, 0, 0, 0},
                  {0, 1, 0, 0, 0, 0},
                  {0, 0, 1, 1, 0, 0},
                  {0, 0, 0, 0, 0, 1},
                  {0, 0, 0, 0, 1, 0}};
  s.alpha = {alpha, 0, 0, 0, 0};
  return s;
}

/// Two queues in tandem, arrivals at queue 1 only.
inline NetworkSpec tandem2(double alpha1 = 0.5) {
  NetworkSpec s;
  s.name = "tandem2";
  s.B = IntMatrix{{-1, 0}, {1, -1}};
  s.C = IntMatrix::identity(2);
  s.alpha = {alpha1, 0};
  return s;
}

inline std::vector<std::string_view> builtin_network_names() { return {"fig1-loop", "tandem2"}; }

inline std::optional<NetworkSpec> builtin_network(std::string_view name) {
  if (name == "fig1-loop") return fig1_loop();
  if (name == "tandem2") return tandem2();
  return std::nullopt;
}

}  // namespace crw

#endif  // CRW_MODEL_HPP
