#ifndef CRW_POLICY_HPP
#define CRW_POLICY_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "crw/error.hpp"
#include "crw/fields.hpp"
#include "crw/model.hpp"

namespace crw {

/// A mu-MaxWeight policy: u*(x) = argmin_u <mu(x), Bu + alpha>.
/// Ties go to the lexicographically smallest control.
struct PolicyConfig {
  SchedulingField field;
  std::string label;
};

/// Relative width of the tie band in select_control: objectives within
/// kTieTolerance * sum_i |mu_i| sum_j |B_ij| of the minimum count as ties.
/// Keeps decisions invariant under rescaling of mu despite rounding.
inline constexpr double kTieTolerance = 1e-12;

namespace detail {

inline bool admissible(const NetworkSpec& spec, const QueueState& x, const std::vector<int>& drift) {
  if (spec.variant == ModelVariant::Truncated) return true;
  for (std::size_t i = 0; i < drift.size(); ++i)
    if (x[i] == 0 && static_cast<double>(drift[i]) + spec.alpha[i] < 0.0) return false;
  return true;
}

inline void check_state(const ValidatedNetwork& net, const QueueState& x) {
  if (x.size() != net.m())
    throw Error(ErrorCode::DimensionMismatch, "state has " + std::to_string(x.size()) + " queues, network has " +
                                                  std::to_string(net.m()));
  for (auto v : x.q)
    if (v < 0) throw Error(ErrorCode::DomainError, "negative backlog");
}

}  // namespace detail

/// Binary controls allowed at x: all feasible controls for the truncated
/// law; for the MeynRegion law only those with [Bu + alpha]_i >= 0 on every
/// empty queue i.
inline std::vector<Control> control_region(const ValidatedNetwork& net, const QueueState& x) {
  detail::check_state(net, x);
  const auto& controls = net.controls();
  const auto& drifts = net.control_drifts();
  std::vector<Control> out;
  for (std::size_t k = 0; k < controls.size(); ++k)
    if (detail::admissible(net.spec(), x, drifts[k])) out.push_back(controls[k]);
  if (out.empty()) throw Error(ErrorCode::EmptyRegion, "no binary control satisfies the region constraints");
  return out;
}

/// <mu, Bu + alpha>.
inline double objective_value(std::span<const double> mu, const ValidatedNetwork& net, const Control& u) {
  if (mu.size() != net.m() || u.size() != net.l()) throw Error(ErrorCode::DimensionMismatch, "objective dimensions");
  const auto drift = net.drift(u);
  double v = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) v += mu[i] * (static_cast<double>(drift[i]) + net.spec().alpha[i]);
  return v;
}

/// Index into net.controls() chosen for weight vector mu at state x.
inline std::size_t select_control_index(std::span<const double> mu, const ValidatedNetwork& net, const QueueState& x) {
  detail::check_state(net, x);
  if (mu.size() != net.m()) throw Error(ErrorCode::DimensionMismatch, "weight vector length");
  const auto& spec = net.spec();
  const auto& drifts = net.control_drifts();

  double scale = 0.0;
  for (std::size_t i = 0; i < net.m(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < net.l(); ++j) row += std::abs(spec.B(i, j));
    scale += std::abs(mu[i]) * row;
  }
  const double band = kTieTolerance * scale;

  // <mu, alpha> does not depend on u and is left out.
  std::vector<double> values(drifts.size());
  std::vector<char> allowed(drifts.size(), 0);
  double best = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < drifts.size(); ++k) {
    if (!detail::admissible(spec, x, drifts[k])) continue;
    double v = 0.0;
    for (std::size_t i = 0; i < net.m(); ++i) v += mu[i] * drifts[k][i];
    values[k] = v;
    allowed[k] = 1;
    if (!any || v < best) best = v;
    any = true;
  }
  if (!any) throw Error(ErrorCode::EmptyRegion, "no binary control satisfies the region constraints");
  for (std::size_t k = 0; k < drifts.size(); ++k)
    if (allowed[k] && values[k] <= best + band) return k;
  throw Error(ErrorCode::EmptyRegion, "unreachable");
}

inline Control select_control(const PolicyConfig& config, const ValidatedNetwork& net, const QueueState& x) {
  const auto mu = config.field(x.as_real());
  return net.controls()[select_control_index(mu, net, x)];
}

}  // namespace crw

#endif  // CRW_POLICY_HPP
