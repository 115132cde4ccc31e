#include <gtest/gtest.h>

#include <random>

#include "crw/sim.hpp"

#define REGRESSION_AVG_COST 7.3811
#define REGRESSION_MAX_BACKLOG 12

using namespace crw;

namespace {

PolicyConfig mw() { return {make_field(FieldSpec::max_weight()), "MaxWeight"}; }

RunConfig run_for(NetworkSpec spec, PolicyConfig policy, std::uint64_t horizon, std::uint64_t seed,
                  CostFunction cost, bool trace = false) {
  return {validate_network(std::move(spec)), std::move(policy), horizon, seed, std::move(cost), trace};
}

}  // namespace

TEST(Arrivals, TrivialRates) {
  const CounterRng rng(1);
  auto s = tandem2(1.0);
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const auto a = sample_arrivals(s, rng, t);
    EXPECT_EQ(a[0], 1);
    EXPECT_EQ(a[1], 0);
  }
}

TEST(Arrivals, BernoulliMean) {
  const CounterRng rng(99);
  const auto s = tandem2(0.5);
  std::int64_t sum = 0;
  const int n = 1000000;
  for (int t = 0; t < n; ++t) sum += sample_arrivals(s, rng, t)[0];
  EXPECT_NEAR(static_cast<double>(sum) / n, 0.5, 0.0015);
}

TEST(Arrivals, InvalidRate) {
  auto s = tandem2(0.5);
  s.alpha[0] = 1.2;
  try {
    sample_arrivals(s, CounterRng(1), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidRate);
  }
}

TEST(Step, TandemTraces) {
  const auto net = validate_network(tandem2(0.5));
  const auto B = net.spec().B;
  std::vector<std::int64_t> none{0, 0}, a{1, 0};
  auto o = step(net, QueueState{0, 0}, Control{1, 1}, none, B);
  EXPECT_EQ(o.next_state, (QueueState{0, 0}));
  EXPECT_EQ(o.excess, (std::vector<std::int64_t>{1, 0}));
  o = step(net, QueueState{3, 1}, Control{1, 1}, a, B);
  EXPECT_EQ(o.next_state, (QueueState{3, 1}));
  EXPECT_EQ(o.excess, (std::vector<std::int64_t>{0, 0}));
  o = step(net, QueueState{4, 2}, Control{0, 0}, a, B);
  EXPECT_EQ(o.next_state, (QueueState{5, 2}));
}

TEST(Step, MeynViolation) {
  auto s = tandem2(0.5);
  s.variant = ModelVariant::MeynRegion;
  const auto net = validate_network(s);
  std::vector<std::int64_t> none{0, 0};
  try {
    step(net, QueueState{0, 0}, Control{1, 0}, none, s.B);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeStateViolation);
  }
}

TEST(Step, ExcessAccountingFuzz) {
  std::mt19937_64 gen(21);
  const auto net = validate_network(fig1_loop(0.5));
  std::uniform_int_distribution<int> Q(0, 3), A(0, 2);
  std::uniform_int_distribution<std::size_t> U(0, net.controls().size() - 1);
  for (int k = 0; k < 100000; ++k) {
    QueueState x(5);
    for (auto& v : x.q) v = Q(gen);
    const auto& u = net.controls()[U(gen)];
    std::vector<std::int64_t> a(5);
    for (auto& v : a) v = A(gen);
    const auto o = step(net, x, u, a, net.spec().B);
    for (std::size_t i = 0; i < 5; ++i) {
      std::int64_t y = x[i];
      for (std::size_t j = 0; j < 6; ++j) y += net.spec().B(i, j) * u[j];
      ASSERT_EQ(o.excess[i], std::max<std::int64_t>(0, -y));
      ASSERT_EQ(o.next_state[i], y + o.excess[i] + a[i]);
      ASSERT_GE(o.next_state[i], 0);
    }
  }
}

TEST(Simulate, EmptySystemStaysEmpty) {
  const auto r = simulate(run_for(tandem2(0.0), mw(), 1, 5, CostFunction::linear({1, 1})));
  EXPECT_EQ(r.metrics.avg_cost, 0.0);
  EXPECT_EQ(r.metrics.avg_backlog, 0.0);
  EXPECT_EQ(r.metrics.max_backlog, 0);
  EXPECT_EQ(r.metrics.total_excess, 0);
}

TEST(Simulate, StarvedQueueRamps) {
  // A field that never weights queue 1: its backlog climbs by one per slot.
  const auto starve = make_field(FieldSpec::custom({"0", "1"}));
  const std::uint64_t n = 2000;
  const auto r = simulate(run_for(tandem2(1.0), {starve, "starve"}, n, 1, CostFunction::linear({1, 1})));
  EXPECT_DOUBLE_EQ(r.metrics.avg_backlog, (n - 1) / 2.0);
  EXPECT_EQ(r.final_state[0], static_cast<std::int64_t>(n));
}

TEST(Simulate, DeterministicAndTraceConsistent) {
  const auto cfg = run_for(fig1_loop(0.6), mw(), 3000, 17, CostFunction::linear({1, 1, 1, 1, 1}), true);
  const auto a = simulate(cfg), b = simulate(cfg);
  EXPECT_EQ(a.metrics, b.metrics);
  ASSERT_EQ(a.trace.size(), 3000u);
  double cost = 0;
  std::int64_t idle = 0;
  for (const auto& row : a.trace) {
    cost += row.cost;
    idle += row.u.is_idle();
    for (auto v : row.q.q) EXPECT_GE(v, 0);
  }
  EXPECT_NEAR(a.metrics.avg_cost, cost / 3000, 1e-12);
  EXPECT_DOUBLE_EQ(a.metrics.idle_fraction, idle / 3000.0);
}

TEST(Simulate, TandemConservation) {
  const auto cfg = run_for(tandem2(0.7), mw(), 5000, 3, CostFunction::linear({1, 1}), true);
  const auto r = simulate(cfg);
  // cumulative arrivals to queue 1 = q1 + q2 + departures, so departures never exceed arrivals
  std::int64_t arrivals = 0, departures = 0;
  const CounterRng rng(3);
  for (std::size_t t = 0; t + 1 < r.trace.size(); ++t) {
    const auto& row = r.trace[t];
    arrivals += sample_arrivals(cfg.network.spec(), rng, t)[0];
    departures += (row.u[1] == 1 && row.q[1] > 0) ? 1 : 0;
    EXPECT_LE(departures, arrivals);
    EXPECT_EQ(r.trace[t + 1].q[0] + r.trace[t + 1].q[1] + departures, arrivals);
  }
}

TEST(Simulate, Fig1LoopMaxWeightRegression) {
  // Pinned from the first run after the oracle suites passed.
  const auto r = simulate(run_for(fig1_loop(0.5), mw(), 10000, 42, CostFunction::linear({1, 1, 1, 1, 1})));
  EXPECT_EQ(r.metrics.horizon, 10000u);
  EXPECT_DOUBLE_EQ(r.metrics.avg_cost, REGRESSION_AVG_COST);
  EXPECT_EQ(r.metrics.max_backlog, REGRESSION_MAX_BACKLOG);
}

TEST(Sweep, SingleCellEqualsSimulate) {
  const auto net = validate_network(tandem2(0.5));
  SweepGrid g{net, {1, 0}, {mw()}, {0.4}, {9}, 2000, CostFunction::linear({1, 1})};
  const auto rows = sweep(g);
  ASSERT_EQ(rows.size(), 1u);
  const auto direct = simulate({net.with_alpha({0.4, 0}), mw(), 2000, 9, CostFunction::linear({1, 1}), false});
  EXPECT_EQ(rows[0].metrics, direct.metrics);
}

TEST(Sweep, ParallelMatchesSerialAndSorted) {
  const auto net = validate_network(fig1_loop(0.5));
  const auto lin = CostFunction::linear({1, 1, 1, 1, 1});
  SweepGrid g{net,  {1, 0, 0, 0, 0},          {{make_field(FieldSpec::mu_p_theta(lin, 1)), "b"}, mw()},
              {0.7, 0.2, 0.5}, {3, 1, 2}, 1500, lin};
  const auto serial = sweep(g, 1), parallel = sweep(g, 4), again = sweep(g, 1);
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(serial, again);
  ASSERT_EQ(serial.size(), 18u);
  for (std::size_t k = 1; k < serial.size(); ++k)
    EXPECT_LT(std::tie(serial[k - 1].policy, serial[k - 1].alpha, serial[k - 1].seed),
              std::tie(serial[k].policy, serial[k].alpha, serial[k].seed));
}

TEST(Sweep, ErrorNamesTheCell) {
  const auto net = validate_network(tandem2(0.5));
  SweepGrid g{net, {1, 0}, {mw()}, {0.5, 1.5}, {1}, 10, CostFunction::linear({1, 1})};
  try {
    sweep(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("alpha=1.5"), std::string::npos) << e.what();
  }
}
