#include <gtest/gtest.h>

#include <random>

#include "crw/policy.hpp"
#include "oracles.hpp"

using namespace crw;

namespace {

PolicyConfig mw() { return {make_field(FieldSpec::max_weight()), "MaxWeight"}; }

ValidatedNetwork meyn(NetworkSpec s) {
  s.variant = ModelVariant::MeynRegion;
  return validate_network(std::move(s));
}

}  // namespace

TEST(Region, TandemMeynFaceRestrictsFirstServer) {
  const auto r = control_region(meyn(tandem2(0.5)), QueueState{{0, 5}});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].u, (std::vector<int>{0, 0}));
  EXPECT_EQ(r[1].u, (std::vector<int>{0, 1}));
}

TEST(Region, InteriorAndTruncatedGiveFullSet) {
  EXPECT_EQ(control_region(meyn(fig1_loop()), QueueState{{1, 2, 3, 4, 5}}).size(), 48u);
  const auto net = validate_network(fig1_loop());
  EXPECT_EQ(control_region(net, QueueState{{0, 0, 0, 0, 0}}).size(), 48u);
}

TEST(Select, Examples) {
  const auto net = validate_network(tandem2(0.5));
  EXPECT_EQ(select_control(mw(), net, QueueState{{3, 1}}).u, (std::vector<int>{1, 1}));
  EXPECT_EQ(select_control(mw(), net, QueueState{{0, 0}}).u, (std::vector<int>{0, 0}));
  EXPECT_EQ(select_control(mw(), meyn(tandem2(0.5)), QueueState{{0, 5}}).u, (std::vector<int>{0, 1}));
}

TEST(Objective, Examples) {
  const auto net = validate_network(tandem2(0.5));
  std::vector<double> mu{3, 1}, zero{0, 0};
  EXPECT_DOUBLE_EQ(objective_value(mu, net, Control{{1, 1}}), -1.5);
  EXPECT_EQ(objective_value(zero, net, Control{{1, 0}}), 0.0);
  EXPECT_DOUBLE_EQ(objective_value(mu, net, Control{{0, 0}}), 1.5);
  std::vector<double> bad{1, 2, 3};
  EXPECT_THROW(objective_value(bad, net, Control{{0, 0}}), Error);
}

TEST(Select, MatchesTextbookMaxWeightOnFig1Grid) {
  const auto spec = fig1_loop(0.5);
  const auto net = validate_network(spec);
  oracle::Mat B(5, std::vector<int>(6)), C(5, std::vector<int>(6));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 6; ++j) B[i][j] = spec.B(i, j), C[i][j] = spec.C(i, j);
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> Q(0, 4);
  const auto policy = mw();
  for (int k = 0; k < 10000; ++k) {
    QueueState x(5);
    for (auto& v : x.q) v = Q(gen);
    std::vector<double> mu(x.q.begin(), x.q.end());
    EXPECT_EQ(select_control(policy, net, x).u, oracle::argmin_control(B, C, spec.alpha, mu, x.q, false));
  }
}

TEST(Select, ScaleInvariantAndDeterministic) {
  const auto net = validate_network(fig1_loop(0.7));
  const auto base = make_field(FieldSpec::mu_p_theta(CostFunction::linear({1, 1, 1, 1, 5}), 1.0));
  std::mt19937_64 gen(12);
  std::uniform_int_distribution<int> Q(0, 30);
  std::uniform_real_distribution<double> L(-3, 3);
  for (int k = 0; k < 1000; ++k) {
    QueueState x(5);
    for (auto& v : x.q) v = Q(gen) < 8 ? 0 : Q(gen);
    const double kappa = std::pow(10.0, L(gen));
    const PolicyConfig a{base, "a"}, b{base.scaled(kappa), "b"};
    const auto u = select_control(a, net, x);
    EXPECT_EQ(u, select_control(b, net, x));
    EXPECT_EQ(u, select_control(a, net, x));
  }
}

TEST(Select, DimensionMismatch) {
  const auto net = validate_network(tandem2());
  EXPECT_THROW(select_control(mw(), net, QueueState{{1, 2, 3}}), Error);
}
