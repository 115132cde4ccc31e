#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crw/fields.hpp"
#include "oracles.hpp"

using namespace crw;

TEST(ExpPerturb, Values) {
  EXPECT_EQ(exp_perturb(0.0, 5.0), 0.0);
  EXPECT_NEAR(exp_perturb(1.0, 1.0), std::exp(-1.0), 1e-15);
  // 9 + e^-10, from the long-double oracle
  EXPECT_NEAR(exp_perturb(10.0, 1.0), 9.0000453999297625, 1e-14);
  EXPECT_NEAR(exp_perturb(10.0, 1.0), static_cast<double>(oracle::exp_perturb(10.0L, 1.0L)), 1e-14);
}

TEST(ExpPerturb, Domain) {
  EXPECT_THROW(exp_perturb(-1.0, 1.0), Error);
  EXPECT_THROW(exp_perturb(1.0, 0.5), Error);
}

TEST(ExpPerturb, SandwichAndMonotone) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> X(0.0, 1e3), T(1.0, 50.0);
  for (int k = 0; k < 10000; ++k) {
    const double x = k % 10 == 0 ? X(gen) * 1e-6 : X(gen), th = T(gen);
    const double y = exp_perturb(x, th);
    EXPECT_GE(y, 0.0);
    EXPECT_LE(y, x);
    EXPECT_GE(y, x - th);
    EXPECT_NEAR(y, static_cast<double>(oracle::exp_perturb(x, th)), 1e-12 * std::max(1.0, x));
    EXPECT_LE(y, exp_perturb(x + 1e-3, th));
  }
}

TEST(LogPerturb, Values) {
  EXPECT_EQ(log_perturb(0.0, 3.0), 0.0);
  EXPECT_NEAR(log_perturb(4.0, 4.0), 4.0 * std::log(2.0), 1e-14);
  EXPECT_NEAR(log_perturb(std::exp(1.0) - 1.0, 1.0), std::exp(1.0) - 1.0, 1e-14);
  EXPECT_THROW(log_perturb(-1.0, 1.0), Error);
  EXPECT_THROW(log_perturb(1.0, 0.0), Error);
}

TEST(Perturbations, DerivativesMatchCentralDifferences) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> X(0.1, 100.0), T(1.0, 20.0);
  for (int k = 0; k < 100; ++k) {
    const double x = X(gen), th = T(gen), h = 1e-5;
    const double de = (static_cast<double>(oracle::exp_perturb(x + h, th) - oracle::exp_perturb(x - h, th))) / (2 * h);
    const double dl = (static_cast<double>(oracle::log_perturb(x + h, th) - oracle::log_perturb(x - h, th))) / (2 * h);
    EXPECT_NEAR(exp_perturb_derivative(x, th), de, 1e-6);
    EXPECT_NEAR(log_perturb_derivative(x, th), dl, 1e-6);
  }
  EXPECT_EQ(exp_perturb_derivative(0.0, 3.0), 0.0);
  EXPECT_EQ(log_perturb_derivative(0.0, 3.0), 0.0);
}

TEST(PTheta, Values) {
  std::vector<double> a{0, 7}, b{1, 0};
  EXPECT_EQ(p_theta(a, 1.0)[0], 0.0);
  const auto p = p_theta(b, 1.0);
  EXPECT_NEAR(p[0], 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_EQ(p[1], 0.0);
  std::vector<double> big{1e6, 1e6};
  for (double v : p_theta(big, 1.0)) EXPECT_NEAR(v, 1.0 - std::exp(-1.0), 1e-5);
}

TEST(PTheta, MonotoneInOwnAndOtherCoordinates) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> X(0.01, 50.0);
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> x{X(gen), X(gen), X(gen)};
    const auto p = p_theta(x, 1.0);
    auto up = x;
    up[0] += 0.5;
    const auto q = p_theta(up, 1.0);
    EXPECT_GT(q[0], p[0]);
    EXPECT_LT(q[1], p[1]);
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(Costs, ValidationAndValues) {
  EXPECT_THROW(CostFunction::linear({1, -1}), Error);
  EXPECT_THROW(CostFunction::quadratic({1, 0}), Error);
  EXPECT_THROW(CostFunction::tandem_fluid(1, 2, 1.0, 1.0), Error);
  EXPECT_THROW(CostFunction::tandem_fluid(2, 1, 0.5, 1.0), Error);
  const auto t = CostFunction::tandem_fluid(1, 2, 0.5, 1);
  const auto& k = std::get<TandemFluidCost>(t.kind());
  EXPECT_DOUBLE_EQ(k.d1(), 2.0);
  EXPECT_DOUBLE_EQ(k.d2(), 1.0);
  std::vector<double> x{3, 1};
  EXPECT_DOUBLE_EQ(t(x), 5.0);
  EXPECT_DOUBLE_EQ(CostFunction::quadratic({1, 2})(x), 0.5 * 9 + 0.5 * 2);
  EXPECT_EQ(CostFunction::linear({1, 1})(std::vector<double>{0, 0}), 0.0);
}

TEST(Costs, AnalyticGradientMatchesNumeric) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> X(0.5, 200.0);
  const CostFunction costs[] = {CostFunction::linear({1, 3}), CostFunction::quadratic({2, 0.5}),
                                CostFunction::tandem_fluid(1, 2, 0.5, 1)};
  for (const auto& c : costs)
    for (int k = 0; k < 200; ++k) {
      std::vector<double> y{X(gen), X(gen)};
      const auto g = c.h0_gradient(y);
      const auto n = numeric_gradient([&](std::span<const double> v) { return c.h0(v); }, y);
      for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(g[i], n[i], std::max(1e-6, 1e-4 * std::abs(g[i])));
    }
}

TEST(TandemGradient, Values) {
  const TandemFluidCost p{1, 2, 0.5, 1};
  std::vector<double> zero{0, 0}, one{1, 1};
  for (auto v : {TandemVariant::ExpPerturbed, TandemVariant::CrossCoupled}) {
    const auto g = tandem_fluid_gradient(zero, p, 1.0, v);
    EXPECT_EQ(g[0], 0.0);
    EXPECT_EQ(g[1], 0.0);
  }
  const double y = std::exp(-1.0), f = 1.0 - std::exp(-1.0);
  const auto g = tandem_fluid_gradient(one, p, 1.0, TandemVariant::ExpPerturbed);
  EXPECT_NEAR(g[0], 2 * (2 * y) * f, 1e-14);
  EXPECT_NEAR(g[1], (2 * (2 * y) + y) * f, 1e-14);
  EXPECT_THROW(tandem_fluid_gradient(one, TandemFluidCost{1, 2, 1, 1}, 1.0, TandemVariant::ExpPerturbed), Error);
}

TEST(TandemGradient, FieldKindsReproduceBothVariants) {
  const auto cost = CostFunction::tandem_fluid(1, 2, 0.5, 1);
  const auto& p = std::get<TandemFluidCost>(cost.kind());
  const auto exp_field = make_field(FieldSpec::h_max_weight_exp(cost, 1.0));
  const auto mod_field = make_field(FieldSpec::mu_p_theta(cost, 1.0));
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> X(0.0, 30.0);
  for (int k = 0; k < 500; ++k) {
    std::vector<double> x{X(gen), X(gen)};
    const auto a = exp_field(x), b = tandem_fluid_gradient(x, p, 1.0, TandemVariant::ExpPerturbed);
    const auto c = mod_field(x), d = tandem_fluid_gradient(x, p, 1.0, TandemVariant::CrossCoupled);
    for (int i = 0; i < 2; ++i) {
      EXPECT_NEAR(a[i], b[i], 1e-12 * std::max(1.0, std::abs(b[i])));
      EXPECT_NEAR(c[i], d[i], 1e-12 * std::max(1.0, std::abs(d[i])));
    }
  }
}

TEST(TandemGradient, ExpVariantIsGradientOfPerturbedH0) {
  const auto cost = CostFunction::tandem_fluid(1, 2, 0.5, 1);
  const auto& p = std::get<TandemFluidCost>(cost.kind());
  auto h = [&](std::span<const double> x) {
    std::vector<double> y{exp_perturb(x[0], 1.0), exp_perturb(x[1], 1.0)};
    return cost.h0(y);
  };
  for (std::vector<double> x : {std::vector<double>{1, 1}, {3, 0.5}, {10, 20}}) {
    const auto g = tandem_fluid_gradient(x, p, 1.0, TandemVariant::ExpPerturbed);
    const auto n = numeric_gradient(h, x);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(g[i], n[i], std::max(1e-6, 1e-6 * std::abs(g[i])));
  }
}

TEST(MakeField, Examples) {
  std::vector<double> x{3, 1};
  const auto mw = make_field(FieldSpec::max_weight())(x);
  EXPECT_EQ(mw, (std::vector<double>{3, 1}));
  const auto mu = make_field(FieldSpec::mu_p_theta(CostFunction::linear({1, 1}), 1.0))(std::vector<double>{1, 0});
  EXPECT_NEAR(mu[0], 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_EQ(mu[1], 0.0);
  const auto hq = make_field(FieldSpec::h_max_weight_exp(CostFunction::quadratic({1, 1}), 1.0));
  for (double k : {0.0, 1.0, 7.0, 1e4}) EXPECT_EQ(hq(std::vector<double>{0, k})[0], 0.0);
}

TEST(MakeField, Errors) {
  FieldSpec s;
  s.kind = FieldKind::MuPTheta;
  try {
    make_field(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedCombination);
  }
  EXPECT_THROW(make_field(FieldSpec::h_max_weight_exp(CostFunction::linear({1}), 0.5)), Error);
}

TEST(MakeField, BuiltinsNonNegativeAndZeroAtOrigin) {
  const auto lin = CostFunction::linear({1, 1, 1, 1, 5});
  const auto quad = CostFunction::quadratic({1, 2, 1, 1, 3});
  const FieldSpec specs[] = {FieldSpec::max_weight(),
                             FieldSpec::h_max_weight_exp(lin, 10),
                             FieldSpec::h_max_weight_log(lin, 10),
                             FieldSpec::mu_p_theta(lin, 1),
                             FieldSpec::h_max_weight_exp(quad, 1),
                             FieldSpec::h_max_weight_log(quad, 2),
                             FieldSpec::mu_p_theta(quad, 1)};
  std::mt19937_64 gen(6);
  std::uniform_int_distribution<int> Q(0, 200);
  for (const auto& s : specs) {
    const auto f = make_field(s);
    for (double v : f(std::vector<double>(5, 0.0))) EXPECT_EQ(v, 0.0);
    for (int k = 0; k < 10000; ++k) {
      std::vector<double> x(5);
      for (auto& v : x) v = Q(gen) < 40 ? 0 : Q(gen);
      for (double v : f(x)) EXPECT_GE(v, 0.0);
    }
  }
}

TEST(Custom, ExpressionField) {
  const auto f = make_field(FieldSpec::custom({"(+ 1 (sin x1))", "1"}));
  const auto v = f(std::vector<double>{M_PI / 2, 5});
  EXPECT_NEAR(v[0], 2.0, 1e-15);
  EXPECT_EQ(v[1], 1.0);
  EXPECT_THROW(make_field(FieldSpec::custom({"(+ 1"})), Error);
  EXPECT_THROW(make_field(FieldSpec::custom({"x3", "1"})), Error);
  const auto bad = make_field(FieldSpec::custom({"(log x1)"}));
  try {
    bad(std::vector<double>{0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EvaluationError);
  }
}

TEST(Normalize, Examples) {
  auto a = normalize_field(FieldValue(std::vector<double>{2, 2}));
  EXPECT_EQ(a.mu, (std::vector<double>{0.5, 0.5}));
  auto z = normalize_field(FieldValue(std::vector<double>{0, 0, 0}));
  EXPECT_TRUE(z.is_zero);
  EXPECT_EQ(z.mu, (std::vector<double>{0, 0, 0}));
  auto b = normalize_field(FieldValue(std::vector<double>{1, 3}));
  EXPECT_EQ(b.mu, (std::vector<double>{0.25, 0.75}));
}

TEST(NumericGradient, Examples) {
  std::vector<double> x{3, 1};
  const auto g = numeric_gradient([](std::span<const double> v) { return 0.5 * (v[0] * v[0] + v[1] * v[1]); }, x, 1e-5);
  EXPECT_NEAR(g[0], 3, 1e-6);
  EXPECT_NEAR(g[1], 1, 1e-6);
  const auto c = numeric_gradient([](std::span<const double>) { return 4.0; }, x, 1e-5);
  EXPECT_EQ(c, (std::vector<double>{0, 0}));
  std::vector<double> y{2, 5};
  const auto b = numeric_gradient([](std::span<const double> v) { return v[0] * v[1]; }, y, 1e-5);
  EXPECT_NEAR(b[0], 5, 1e-6);
  EXPECT_NEAR(b[1], 2, 1e-6);
  // one-sided at the boundary stays in the domain
  std::vector<double> edge{0, 1};
  const auto s = numeric_gradient([](std::span<const double> v) { return std::sqrt(v[0] + 1) + v[1]; }, edge);
  EXPECT_NEAR(s[0], 0.5, 1e-6);
}
