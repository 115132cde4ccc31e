#ifndef CRW_FIELDS_HPP
#define CRW_FIELDS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crw/error.hpp"
#include "crw/expression.hpp"

namespace crw {

// ---------------------------------------------------------------------------
// Componentwise perturbations x -> x~ and their derivatives.
// Both vanish with zero slope at x = 0, which is what makes a composed
// field h0(x~) have zero partial derivative on empty queues.

namespace detail {

inline void require_non_negative(double x, std::string_view what) {
  if (!(x >= 0.0)) throw Error(ErrorCode::DomainError, std::string(what) + " must be non-negative");
}

// x + theta (e^{-x/theta} - 1) for any theta > 0.
inline double exp_perturb_any_theta(double x, double theta) {
  const double r = x / theta;
  if (r < 1e-2) {
    // r + expm1(-r) cancels catastrophically near zero; use the series.
    const double r2 = r * r;
    return theta * r2 * (0.5 - r * (1.0 / 6 - r * (1.0 / 24 - r * (1.0 / 120 - r / 720))));
  }
  // Written as (x - theta) + theta e^{-r} once x > theta so the result
  // never rounds below x - theta.
  if (r > 1.0) return (x - theta) + theta * std::exp(-r);
  return theta * (r + std::expm1(-r));
}

}  // namespace detail

/// Exponential perturbation x + theta (e^{-x/theta} - 1), theta >= 1.
inline double exp_perturb(double x, double theta) {
  detail::require_non_negative(x, "x");
  if (!(theta >= 1.0)) throw Error(ErrorCode::DomainError, "exponential perturbation needs theta >= 1");
  return detail::exp_perturb_any_theta(x, theta);
}

/// d/dx of exp_perturb: 1 - e^{-x/theta}.
inline double exp_perturb_derivative(double x, double theta) {
  detail::require_non_negative(x, "x");
  if (!(theta > 0.0)) throw Error(ErrorCode::DomainError, "theta must be positive");
  return -std::expm1(-x / theta);
}

/// Logarithmic perturbation x log(1 + x/theta), theta > 0.
inline double log_perturb(double x, double theta) {
  detail::require_non_negative(x, "x");
  if (!(theta > 0.0)) throw Error(ErrorCode::DomainError, "logarithmic perturbation needs theta > 0");
  return x * std::log1p(x / theta);
}

/// d/dx of log_perturb: log(1 + x/theta) + x/(theta + x).
inline double log_perturb_derivative(double x, double theta) {
  detail::require_non_negative(x, "x");
  if (!(theta > 0.0)) throw Error(ErrorCode::DomainError, "logarithmic perturbation needs theta > 0");
  return std::log1p(x / theta) + x / (theta + x);
}

/// Diagonal of P_theta(x): 1 - exp(-x_i / (theta (1 + sum_{j != i} x_j))).
/// Entry i is exactly zero when x_i = 0 and tends to zero as the other
/// queues grow, so a queue is not served while the rest of the network
/// is heavily loaded.
inline std::vector<double> p_theta(std::span<const double> x, double theta) {
  if (!(theta > 0.0)) throw Error(ErrorCode::DomainError, "P_theta needs theta > 0");
  for (double v : x) detail::require_non_negative(v, "state component");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double others = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i) others += x[j];
    out[i] = -std::expm1(-x[i] / (theta * (1.0 + others)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cost functions and their surrogate value functions h0.

struct LinearCost {
  std::vector<double> c;
};

/// c(x) = 1/2 sum_i d_i x_i^2, so that h0 = c has gradient D x.
struct QuadraticDiagCost {
  std::vector<double> d;
};

/// Linear cost c1 x1 + c2 x2 on the two-queue tandem, with the fluid value
/// function h0(x) = 1/2 d1 (x1 + x2)^2 + 1/2 d2 x2^2 as surrogate.
struct TandemFluidCost {
  double c1 = 1.0;
  double c2 = 2.0;
  double alpha1 = 0.5;
  double nu2 = 1.0;  // read as the service rate of queue 2

  double d1() const { return c1 / (nu2 - alpha1); }
  double d2() const { return (c2 - c1) / nu2; }
};

class CostFunction {
 public:
  using Kind = std::variant<LinearCost, QuadraticDiagCost, TandemFluidCost>;

  CostFunction() : kind_(LinearCost{}) {}
  explicit CostFunction(Kind kind) : kind_(std::move(kind)) { validate(); }

  static CostFunction linear(std::vector<double> c) { return CostFunction(LinearCost{std::move(c)}); }
  static CostFunction quadratic(std::vector<double> d) { return CostFunction(QuadraticDiagCost{std::move(d)}); }
  static CostFunction tandem_fluid(double c1, double c2, double alpha1, double nu2) {
    return CostFunction(TandemFluidCost{c1, c2, alpha1, nu2});
  }

  const Kind& kind() const noexcept { return kind_; }
  bool is_linear() const noexcept { return std::holds_alternative<LinearCost>(kind_); }

  std::string_view kind_name() const {
    switch (kind_.index()) {
      case 0: return "Linear";
      case 1: return "QuadraticDiag";
      default: return "TandemFluid";
    }
  }

  /// Number of queues the cost is defined for.
  std::size_t dimension() const {
    if (auto* l = std::get_if<LinearCost>(&kind_)) return l->c.size();
    if (auto* q = std::get_if<QuadraticDiagCost>(&kind_)) return q->d.size();
    return 2;
  }

  /// c(x).
  double operator()(std::span<const double> x) const {
    check_dim(x);
    if (auto* l = std::get_if<LinearCost>(&kind_)) return std::inner_product(x.begin(), x.end(), l->c.begin(), 0.0);
    if (auto* q = std::get_if<QuadraticDiagCost>(&kind_)) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += 0.5 * q->d[i] * x[i] * x[i];
      return s;
    }
    const auto& t = std::get<TandemFluidCost>(kind_);
    return t.c1 * x[0] + t.c2 * x[1];
  }

  /// Surrogate value function h0(y).
  double h0(std::span<const double> y) const {
    if (auto* t = std::get_if<TandemFluidCost>(&kind_)) {
      check_dim(y);
      const double s = y[0] + y[1];
      return 0.5 * t->d1() * s * s + 0.5 * t->d2() * y[1] * y[1];
    }
    return (*this)(y);
  }

  std::vector<double> h0_gradient(std::span<const double> y) const {
    check_dim(y);
    if (auto* l = std::get_if<LinearCost>(&kind_)) return l->c;
    if (auto* q = std::get_if<QuadraticDiagCost>(&kind_)) {
      std::vector<double> g(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) g[i] = q->d[i] * y[i];
      return g;
    }
    const auto& t = std::get<TandemFluidCost>(kind_);
    const double s = t.d1() * (y[0] + y[1]);
    return {s, s + t.d2() * y[1]};
  }

 private:
  void validate() const {
    if (auto* l = std::get_if<LinearCost>(&kind_)) {
      for (double v : l->c)
        if (!(v >= 0.0)) throw Error(ErrorCode::InvalidParams, "linear cost weights must be non-negative");
    } else if (auto* q = std::get_if<QuadraticDiagCost>(&kind_)) {
      for (double v : q->d)
        if (!(v > 0.0)) throw Error(ErrorCode::InvalidParams, "quadratic cost diagonal must be positive");
    } else {
      const auto& t = std::get<TandemFluidCost>(kind_);
      if (!(t.nu2 > t.alpha1) || !(t.alpha1 >= 0.0))
        throw Error(ErrorCode::InvalidParams, "tandem fluid cost needs nu2 > alpha1 >= 0");
      if (!(t.c2 >= t.c1) || !(t.c1 > 0.0))
        throw Error(ErrorCode::InvalidParams, "tandem fluid cost needs c2 >= c1 > 0");
    }
  }

  void check_dim(std::span<const double> x) const {
    if (x.size() != dimension())
      throw Error(ErrorCode::DimensionMismatch, std::string(kind_name()) + " cost is defined for " +
                                                    std::to_string(dimension()) + " queues, state has " +
                                                    std::to_string(x.size()));
  }

  Kind kind_;
};

// ---------------------------------------------------------------------------
// Two-queue tandem: the gradient of the exponentially perturbed fluid value
// function, and the cross-coupled variant whose exponents see the other
// queue's backlog.

enum class TandemVariant { ExpPerturbed, CrossCoupled };

inline std::vector<double> tandem_fluid_gradient(std::span<const double> x, const TandemFluidCost& params,
                                                 double theta, TandemVariant variant) {
  if (x.size() != 2) throw Error(ErrorCode::DimensionMismatch, "tandem gradient needs a 2-vector");
  if (!(params.nu2 > params.alpha1)) throw Error(ErrorCode::InvalidParams, "tandem fluid gradient needs nu2 > alpha1");
  detail::require_non_negative(x[0], "x1");
  detail::require_non_negative(x[1], "x2");
  if (!(theta > 0.0)) throw Error(ErrorCode::DomainError, "theta must be positive");
  const double y1 = detail::exp_perturb_any_theta(x[0], theta);
  const double y2 = detail::exp_perturb_any_theta(x[1], theta);
  const double g1 = params.d1() * (y1 + y2);
  const double g2 = g1 + params.d2() * y2;
  if (variant == TandemVariant::ExpPerturbed)
    return {g1 * -std::expm1(-x[0] / theta), g2 * -std::expm1(-x[1] / theta)};
  return {g1 * -std::expm1(-x[0] / (theta * (1.0 + x[1]))), g2 * -std::expm1(-x[1] / (theta * (1.0 + x[0])))};
}

// ---------------------------------------------------------------------------
// Scheduling fields.

enum class FieldKind { MaxWeight, HMaxWeightExp, HMaxWeightLog, MuPTheta, Custom };

constexpr std::string_view to_string(FieldKind k) {
  switch (k) {
    case FieldKind::MaxWeight: return "MaxWeight";
    case FieldKind::HMaxWeightExp: return "HMaxWeightExp";
    case FieldKind::HMaxWeightLog: return "HMaxWeightLog";
    case FieldKind::MuPTheta: return "MuPTheta";
    case FieldKind::Custom: return "Custom";
  }
  return "?";
}

struct FieldSpec {
  FieldKind kind = FieldKind::MaxWeight;
  double theta = 1.0;
  std::optional<CostFunction> cost;
  std::vector<double> D;                 // MaxWeight diagonal; empty = identity
  std::vector<std::string> expressions;  // Custom: one per coordinate

  static FieldSpec max_weight(std::vector<double> D = {}) {
    FieldSpec s;
    s.kind = FieldKind::MaxWeight;
    s.D = std::move(D);
    return s;
  }
  static FieldSpec h_max_weight_exp(CostFunction cost, double theta) {
    return FieldSpec{FieldKind::HMaxWeightExp, theta, std::move(cost), {}, {}};
  }
  static FieldSpec h_max_weight_log(CostFunction cost, double theta) {
    return FieldSpec{FieldKind::HMaxWeightLog, theta, std::move(cost), {}, {}};
  }
  static FieldSpec mu_p_theta(CostFunction cost, double theta) {
    return FieldSpec{FieldKind::MuPTheta, theta, std::move(cost), {}, {}};
  }
  static FieldSpec custom(std::vector<std::string> expressions) {
    FieldSpec s;
    s.kind = FieldKind::Custom;
    s.expressions = std::move(expressions);
    return s;
  }
};

/// Evaluable weight field x -> mu(x). Value type; copies share the
/// immutable evaluator.
class SchedulingField {
 public:
  using Fn = std::function<std::vector<double>(std::span<const double>)>;

  SchedulingField() = default;

  /// Wrap an arbitrary callable. `dimension` 0 means any dimension.
  static SchedulingField from_function(Fn fn, std::string name, std::size_t dimension = 0) {
    SchedulingField f;
    f.fn_ = std::make_shared<const Fn>(std::move(fn));
    f.name_ = std::move(name);
    f.dimension_ = dimension;
    return f;
  }

  std::vector<double> operator()(std::span<const double> x) const {
    if (!fn_) throw Error(ErrorCode::EvaluationError, "empty scheduling field");
    if (dimension_ != 0 && x.size() != dimension_)
      throw Error(ErrorCode::DimensionMismatch, "field '" + name_ + "' is defined for " + std::to_string(dimension_) +
                                                    " queues, state has " + std::to_string(x.size()));
    return (*fn_)(x);
  }

  /// Scaled copy kappa * mu.
  SchedulingField scaled(double kappa) const {
    auto inner = fn_;
    return from_function(
        [inner, kappa](std::span<const double> x) {
          auto v = (*inner)(x);
          for (double& e : v) e *= kappa;
          return v;
        },
        name_ + "*k", dimension_);
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return dimension_; }
  explicit operator bool() const noexcept { return static_cast<bool>(fn_); }

 private:
  std::shared_ptr<const Fn> fn_;
  std::string name_;
  std::size_t dimension_ = 0;
};

namespace detail {

inline void require_state(std::span<const double> x) {
  for (double v : x)
    if (!(v >= 0.0)) throw Error(ErrorCode::DomainError, "field evaluated at a state with a negative component");
}

inline std::vector<double> perturbed_state(std::span<const double> x, double theta) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = exp_perturb_any_theta(x[i], theta);
  return y;
}

}  // namespace detail

/// Build the evaluable field for a FieldSpec.
///  MaxWeight      mu = D x
///  HMaxWeightExp  mu_i = dh0/dy_i(y) * (1 - e^{-x_i/theta}),       y = exp-perturbed x
///  HMaxWeightLog  mu_i = dh0/dy_i(y) * (log(1+x_i/theta) + x_i/(theta+x_i)),  y = log-perturbed x
///  MuPTheta       mu = P_theta(x) g, with g = c for linear cost and g = grad h0(y) otherwise
///  Custom         mu_i = expression_i(x)
inline SchedulingField make_field(const FieldSpec& spec) {
  const double theta = spec.theta;
  const auto need_cost = [&] {
    if (!spec.cost)
      throw Error(ErrorCode::UnsupportedCombination, std::string(to_string(spec.kind)) + " field needs a cost function");
    return *spec.cost;
  };
  const std::string label(to_string(spec.kind));
  switch (spec.kind) {
    case FieldKind::MaxWeight: {
      if (spec.cost) throw Error(ErrorCode::UnsupportedCombination, "MaxWeight takes a diagonal D, not a cost");
      for (double d : spec.D)
        if (!(d > 0.0)) throw Error(ErrorCode::InvalidParams, "MaxWeight diagonal must be positive");
      auto D = spec.D;
      return SchedulingField::from_function(
          [D](std::span<const double> x) {
            detail::require_state(x);
            std::vector<double> mu(x.begin(), x.end());
            for (std::size_t i = 0; i < mu.size(); ++i) mu[i] *= D.empty() ? 1.0 : D[i];
            return mu;
          },
          label, spec.D.size());
    }
    case FieldKind::HMaxWeightExp: {
      auto cost = need_cost();
      if (!(theta >= 1.0)) throw Error(ErrorCode::InvalidParams, "HMaxWeightExp needs theta >= 1");
      return SchedulingField::from_function(
          [cost, theta](std::span<const double> x) {
            detail::require_state(x);
            auto mu = cost.h0_gradient(detail::perturbed_state(x, theta));
            for (std::size_t i = 0; i < mu.size(); ++i) mu[i] *= -std::expm1(-x[i] / theta);
            return mu;
          },
          label, cost.dimension());
    }
    case FieldKind::HMaxWeightLog: {
      auto cost = need_cost();
      if (!(theta > 0.0)) throw Error(ErrorCode::InvalidParams, "HMaxWeightLog needs theta > 0");
      return SchedulingField::from_function(
          [cost, theta](std::span<const double> x) {
            detail::require_state(x);
            std::vector<double> y(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = log_perturb(x[i], theta);
            auto mu = cost.h0_gradient(y);
            for (std::size_t i = 0; i < mu.size(); ++i) mu[i] *= log_perturb_derivative(x[i], theta);
            return mu;
          },
          label, cost.dimension());
    }
    case FieldKind::MuPTheta: {
      auto cost = need_cost();
      if (!(theta > 0.0)) throw Error(ErrorCode::InvalidParams, "MuPTheta needs theta > 0");
      return SchedulingField::from_function(
          [cost, theta](std::span<const double> x) {
            detail::require_state(x);
            auto mu = cost.is_linear() ? cost.h0_gradient(x) : cost.h0_gradient(detail::perturbed_state(x, theta));
            const auto p = p_theta(x, theta);
            for (std::size_t i = 0; i < mu.size(); ++i) mu[i] *= p[i];
            return mu;
          },
          label, cost.dimension());
    }
    case FieldKind::Custom: {
      if (spec.cost) throw Error(ErrorCode::UnsupportedCombination, "Custom fields carry no cost");
      if (spec.expressions.empty()) throw Error(ErrorCode::InvalidParams, "Custom field needs at least one expression");
      std::vector<Expression> exprs;
      for (const auto& text : spec.expressions) exprs.push_back(Expression::parse(text));
      const std::size_t m = exprs.size();
      for (const auto& e : exprs)
        if (e.max_variable() > m)
          throw Error(ErrorCode::DimensionMismatch, "expression '" + e.source() + "' references a coordinate beyond x" +
                                                        std::to_string(m));
      return SchedulingField::from_function(
          [exprs](std::span<const double> x) {
            std::vector<double> mu(exprs.size());
            for (std::size_t i = 0; i < exprs.size(); ++i) mu[i] = exprs[i].evaluate(x);
            return mu;
          },
          label, m);
    }
  }
  throw Error(ErrorCode::UnsupportedCombination, "unknown field kind");
}

// ---------------------------------------------------------------------------

/// Weight vector with its zero flag: is_zero iff every component < 1e-15.
struct FieldValue {
  std::vector<double> mu;
  bool is_zero = true;

  FieldValue() = default;
  explicit FieldValue(std::vector<double> values) : mu(std::move(values)) {
    is_zero = std::all_of(mu.begin(), mu.end(), [](double v) { return std::abs(v) < kZeroThreshold; });
  }

  static constexpr double kZeroThreshold = 1e-15;
};

/// mu / ||mu||_1, or the zero vector (is_zero) for a zero field.
inline FieldValue normalize_field(const FieldValue& value) {
  for (double v : value.mu)
    if (!(v >= 0.0)) throw Error(ErrorCode::DomainError, "weight vector must be non-negative");
  double norm = 0.0;
  for (double v : value.mu) norm += v;
  if (value.is_zero || norm <= 0.0) {
    FieldValue z(std::vector<double>(value.mu.size(), 0.0));
    return z;
  }
  std::vector<double> out(value.mu.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = value.mu[i] / norm;
  return FieldValue(std::move(out));
}

inline std::vector<double> normalize_weights(std::span<const double> mu) {
  return normalize_field(FieldValue(std::vector<double>(mu.begin(), mu.end()))).mu;
}

/// Default finite-difference step for coordinate value v.
inline double default_step(double v) { return 1e-5 * std::max(1.0, std::abs(v)); }

/// Gradient of a scalar function on the non-negative orthant: central
/// differences, switching to the second-order forward stencil when a
/// coordinate is closer than one step to the boundary x_i = 0.
/// step <= 0 selects default_step per coordinate.
inline std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                            std::span<const double> x, double step = 0.0) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = step > 0.0 ? step : default_step(x[i]);
    const double xi = x[i];
    if (xi >= h) {
      point[i] = xi + h;
      const double fp = f(point);
      point[i] = xi - h;
      const double fm = f(point);
      grad[i] = (fp - fm) / (2.0 * h);
    } else {
      const double f0 = f(point);
      point[i] = xi + h;
      const double f1 = f(point);
      point[i] = xi + 2.0 * h;
      const double f2 = f(point);
      grad[i] = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
    }
    point[i] = xi;
  }
  return grad;
}

/// Jacobian rows d mu_i / dx, by numeric_gradient on each component.
inline std::vector<std::vector<double>> field_jacobian(const SchedulingField& field, std::span<const double> x,
                                                       double step = 0.0) {
  const std::size_t m = x.size();
  std::vector<std::vector<double>> rows(m, std::vector<double>(m, 0.0));
  std::vector<double> point(x.begin(), x.end());
  for (std::size_t j = 0; j < m; ++j) {
    const double h = step > 0.0 ? step : default_step(x[j]);
    const double xj = x[j];
    if (xj >= h) {
      point[j] = xj + h;
      const auto fp = field(point);
      point[j] = xj - h;
      const auto fm = field(point);
      for (std::size_t i = 0; i < m; ++i) rows[i][j] = (fp[i] - fm[i]) / (2.0 * h);
    } else {
      const auto f0 = field(point);
      point[j] = xj + h;
      const auto f1 = field(point);
      point[j] = xj + 2.0 * h;
      const auto f2 = field(point);
      for (std::size_t i = 0; i < m; ++i) rows[i][j] = (-3.0 * f0[i] + 4.0 * f1[i] - f2[i]) / (2.0 * h);
    }
    point[j] = xj;
  }
  return rows;
}

}  // namespace crw

#endif  // CRW_FIELDS_HPP
