#ifndef CRW_SIM_HPP
#define CRW_SIM_HPP

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "crw/error.hpp"
#include "crw/fields.hpp"
#include "crw/model.hpp"
#include "crw/policy.hpp"
#include "crw/rng.hpp"

namespace crw {

/// A_i(t) for every queue, drawn from stream (Arrival, i) at `slot`.
inline std::vector<std::int64_t> sample_arrivals(const NetworkSpec& spec, const CounterRng& rng, std::uint64_t slot) {
  std::vector<std::int64_t> a(spec.m(), 0);
  for (std::size_t i = 0; i < spec.m(); ++i) {
    const double rate = spec.alpha[i];
    if (rate < 0.0) throw Error(ErrorCode::NegativeRate, "negative arrival rate");
    if (rate == 0.0) continue;
    const double u = rng.uniform(slot, stream_id(StreamKind::Arrival, static_cast<std::uint32_t>(i)));
    if (spec.arrival_dist == ArrivalDist::Bernoulli) {
      if (rate > 1.0) throw Error(ErrorCode::InvalidRate, "Bernoulli arrivals need alpha <= 1");
      a[i] = bernoulli_draw(rate, u) ? 1 : 0;
    } else {
      a[i] = poisson_draw(rate, u);
    }
  }
  return a;
}

/// B(t+1). Deterministic service returns the mean B; Bernoulli service
/// zeroes the column of each activity whose attempt fails.
inline IntMatrix sample_service(const NetworkSpec& spec, const CounterRng& rng, std::uint64_t slot) {
  IntMatrix B = spec.B;
  if (spec.service_dist == ServiceDist::Deterministic) return B;
  for (std::size_t j = 0; j < spec.l(); ++j) {
    const double u = rng.uniform(slot, stream_id(StreamKind::Service, static_cast<std::uint32_t>(j)));
    if (bernoulli_draw(spec.service_success, u)) continue;
    for (std::size_t i = 0; i < spec.m(); ++i) B(i, j) = 0;
  }
  return B;
}

struct StepOutcome {
  QueueState next_state;
  std::vector<std::int64_t> excess;  // z: removals that found the queue empty
  std::vector<std::int64_t> arrivals;
  IntMatrix service_matrix_used;
};

/// One slot of the queueing law.
///  Truncated:  next = [x + Bu]^+ + a = x + Bu + z + a,  z_i = max(0, -(x + Bu)_i)
///  MeynRegion: next = x + Bu + a, which must stay non-negative.
inline StepOutcome step(const ValidatedNetwork& net, const QueueState& x, const Control& u,
                        std::span<const std::int64_t> arrivals, const IntMatrix& service) {
  const std::size_t m = net.m(), l = net.l();
  if (x.size() != m || u.size() != l || arrivals.size() != m || service.rows() != m || service.cols() != l)
    throw Error(ErrorCode::DimensionMismatch, "step inputs");
  StepOutcome out;
  out.next_state = QueueState(m);
  out.excess.assign(m, 0);
  out.arrivals.assign(arrivals.begin(), arrivals.end());
  out.service_matrix_used = service;
  for (std::size_t i = 0; i < m; ++i) {
    std::int64_t y = x[i];
    for (std::size_t j = 0; j < l; ++j) y += static_cast<std::int64_t>(service(i, j)) * u[j];
    if (net.spec().variant == ModelVariant::Truncated) {
      const std::int64_t z = y < 0 ? -y : 0;
      out.excess[i] = z;
      out.next_state[i] = y + z + arrivals[i];
    } else {
      const std::int64_t next = y + arrivals[i];
      if (next < 0)
        throw Error(ErrorCode::NegativeStateViolation,
                    "queue " + std::to_string(i + 1) + " would reach " + std::to_string(next) +
                        "; the control region does not cover this service outcome");
      out.next_state[i] = next;
    }
  }
  return out;
}

struct SimMetrics {
  std::uint64_t horizon = 0;
  double avg_cost = 0.0;     // n^-1 sum_{t<n} c(Q(t))
  double avg_backlog = 0.0;  // n^-1 sum_{t<n} ||Q(t)||_1
  std::int64_t max_backlog = 0;
  double idle_fraction = 0.0;
  std::int64_t total_excess = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const SimMetrics&, const SimMetrics&) = default;
};

struct TraceRow {
  std::uint64_t t = 0;
  QueueState q;
  Control u;
  double cost = 0.0;
};

struct RunConfig {
  ValidatedNetwork network;
  PolicyConfig policy;
  std::uint64_t horizon = 10000;
  std::uint64_t seed = 0;
  CostFunction cost;
  bool record_trace = false;
};

struct SimResult {
  SimMetrics metrics;
  std::vector<TraceRow> trace;
  QueueState final_state;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Runs Q(0) = 0 forward `horizon` slots: select u, draw A and B, step.
inline SimResult simulate(const RunConfig& config) {
  if (config.horizon < 1) throw Error(ErrorCode::InvalidParams, "horizon must be >= 1");
  const auto& net = config.network;
  const CounterRng rng(config.seed);
  SimResult result;
  QueueState x(net.m());
  CompensatedSum cost_sum;
  std::int64_t backlog_sum = 0;
  std::int64_t max_backlog = 0;
  std::int64_t excess = 0;
  std::uint64_t idle = 0;
  for (std::uint64_t t = 0; t < config.horizon; ++t) {
    const auto xr = x.as_real();
    const double c = config.cost(xr);
    cost_sum.add(c);
    const std::int64_t total = x.total();
    backlog_sum += total;
    max_backlog = std::max(max_backlog, total);

    const auto mu = config.policy.field(xr);
    const Control& u = net.controls()[select_control_index(mu, net, x)];
    if (u.is_idle()) ++idle;
    if (config.record_trace) result.trace.push_back({t, x, u, c});

    const auto a = sample_arrivals(net.spec(), rng, t);
    const auto B = sample_service(net.spec(), rng, t);
    auto out = step(net, x, u, a, B);
    for (auto z : out.excess) excess += z;
    x = std::move(out.next_state);
  }
  const double n = static_cast<double>(config.horizon);
  result.metrics.horizon = config.horizon;
  result.metrics.avg_cost = cost_sum.value() / n;
  result.metrics.avg_backlog = static_cast<double>(backlog_sum) / n;
  result.metrics.max_backlog = max_backlog;
  result.metrics.idle_fraction = static_cast<double>(idle) / n;
  result.metrics.total_excess = excess;
  result.metrics.seed = config.seed;
  result.final_state = std::move(x);
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps over policies x arrival rates x seeds on one network.

struct SweepGrid {
  ValidatedNetwork network;
  std::vector<double> arrival_pattern;  // alpha = a * pattern for each grid value a
  std::vector<PolicyConfig> policies;
  std::vector<double> alphas;
  std::vector<std::uint64_t> seeds;
  std::uint64_t horizon = 10000;
  CostFunction cost;
};

struct SweepRow {
  std::string policy;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  SimMetrics metrics;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

inline std::string format_cell_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::vector<double> scaled_arrivals(std::span<const double> pattern, double a) {
  std::vector<double> alpha(pattern.begin(), pattern.end());
  for (double& v : alpha) v *= a;
  return alpha;
}

/// One row per (policy, alpha, seed) cell, sorted by (policy label, alpha,
/// seed). Cells share nothing mutable, so `jobs` only changes wall time.
inline std::vector<SweepRow> sweep(const SweepGrid& grid, unsigned jobs = 1) {
  if (grid.policies.empty() || grid.alphas.empty() || grid.seeds.empty())
    throw Error(ErrorCode::InvalidParams, "sweep grid has an empty axis");
  if (grid.arrival_pattern.size() != grid.network.m())
    throw Error(ErrorCode::DimensionMismatch, "arrival pattern length");

  struct Cell {
    std::size_t policy, alpha, seed;
  };
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < grid.policies.size(); ++p)
    for (std::size_t a = 0; a < grid.alphas.size(); ++a)
      for (std::size_t s = 0; s < grid.seeds.size(); ++s) cells.push_back({p, a, s});

  std::vector<ValidatedNetwork> networks;
  for (double a : grid.alphas) {
    try {
      networks.push_back(grid.network.with_alpha(scaled_arrivals(grid.arrival_pattern, a)));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " [cell alpha=" + format_cell_value(a) + "]");
    }
  }

  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      const Cell& cell = cells[k];
      try {
        RunConfig run{networks[cell.alpha], grid.policies[cell.policy], grid.horizon, grid.seeds[cell.seed], grid.cost,
                      false};
        rows[k] = {grid.policies[cell.policy].label, grid.alphas[cell.alpha], grid.seeds[cell.seed],
                   simulate(run).metrics};
      } catch (const Error& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::make_exception_ptr(Error(e.code(), std::string(e.what()) + " [cell policy=" +
                                                                grid.policies[cell.policy].label + " alpha=" +
                                                                format_cell_value(grid.alphas[cell.alpha]) +
                                                                " seed=" + std::to_string(grid.seeds[cell.seed]) + "]"));
        next = cells.size();
        return;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.policy, a.alpha, a.seed) < std::tie(b.policy, b.alpha, b.seed);
  });
  return rows;
}

}  // namespace crw

#endif  // CRW_SIM_HPP
