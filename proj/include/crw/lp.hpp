#ifndef CRW_LP_HPP
#define CRW_LP_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "crw/error.hpp"
#include "crw/matrix.hpp"

namespace crw::lp {

enum class Status { Optimal, Infeasible, Unbounded };

constexpr std::string_view to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "unknown";
}

struct Result {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

namespace detail {

// Dense tableau simplex, maximize c.x subject to A x <= b, x >= 0.
// Bland's rule on both entering and leaving choices, so degenerate
// vertices (common in these 0/1 polytopes) cannot cycle.
class Tableau {
 public:
  Tableau(const Matrix<double>& A, std::span<const double> b, std::span<const double> c)
      : rows_(A.rows()), cols_(A.cols()), t_(rows_ + 2, cols_ + 2), basic_(rows_), nonbasic_(cols_ + 1) {
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) t_(i, j) = A(i, j);
      t_(i, cols_) = -1.0;
      t_(i, cols_ + 1) = b[i];
      basic_[i] = static_cast<long>(cols_ + i);
    }
    for (std::size_t j = 0; j < cols_; ++j) {
      nonbasic_[j] = static_cast<long>(j);
      t_(rows_, j) = -c[j];
    }
    nonbasic_[cols_] = -1;
    t_(rows_ + 1, cols_) = 1.0;
  }

  Result solve() {
    Result result;
    std::size_t worst = 0;
    for (std::size_t i = 1; i < rows_; ++i)
      if (t_(i, cols_ + 1) < t_(worst, cols_ + 1)) worst = i;
    if (rows_ > 0 && t_(worst, cols_ + 1) < -kEps) {
      pivot(worst, cols_);
      if (!run(true) || t_(rows_ + 1, cols_ + 1) < -kEps) {
        result.status = Status::Infeasible;
        return result;
      }
      for (std::size_t i = 0; i < rows_; ++i) {
        if (basic_[i] != -1) continue;
        std::size_t s = cols_ + 1;
        for (std::size_t j = 0; j <= cols_; ++j)
          if (s == cols_ + 1 || t_(i, j) < t_(i, s) || (t_(i, j) == t_(i, s) && nonbasic_[j] < nonbasic_[s])) s = j;
        pivot(i, s);
      }
    }
    if (!run(false)) {
      result.status = Status::Unbounded;
      return result;
    }
    result.status = Status::Optimal;
    result.x.assign(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
      if (basic_[i] >= 0 && static_cast<std::size_t>(basic_[i]) < cols_) result.x[static_cast<std::size_t>(basic_[i])] = t_(i, cols_ + 1);
    result.objective = t_(rows_, cols_ + 1);
    return result;
  }

 private:
  static constexpr double kEps = 1e-11;

  void pivot(std::size_t r, std::size_t s) {
    const double inv = 1.0 / t_(r, s);
    for (std::size_t i = 0; i < rows_ + 2; ++i) {
      if (i == r || t_(i, s) == 0.0) continue;
      const double f = t_(i, s) * inv;
      for (std::size_t j = 0; j < cols_ + 2; ++j)
        if (j != s) t_(i, j) -= t_(r, j) * f;
      t_(i, s) = -f;
    }
    for (std::size_t j = 0; j < cols_ + 2; ++j)
      if (j != s) t_(r, j) *= inv;
    t_(r, s) = inv;
    std::swap(basic_[r], nonbasic_[s]);
  }

  bool run(bool phase_one) {
    const std::size_t obj = phase_one ? rows_ + 1 : rows_;
    for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
      // Bland: lowest-labelled improving column.
      std::size_t s = cols_ + 1;
      for (std::size_t j = 0; j <= cols_; ++j) {
        if (!phase_one && nonbasic_[j] == -1) continue;
        if (t_(obj, j) < -kEps && (s == cols_ + 1 || nonbasic_[j] < nonbasic_[s])) s = j;
      }
      if (s == cols_ + 1) return true;
      std::size_t r = rows_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_; ++i) {
        if (t_(i, s) <= kEps) continue;
        const double ratio = t_(i, cols_ + 1) / t_(i, s);
        if (r == rows_ || ratio < best - kEps || (std::abs(ratio - best) <= kEps && basic_[i] < basic_[r])) {
          r = i;
          best = ratio;
        }
      }
      if (r == rows_) return false;
      pivot(r, s);
    }
    throw Error(ErrorCode::LpFailure, "simplex iteration limit reached");
  }

  static constexpr std::size_t kMaxIterations = 100000;

  std::size_t rows_;
  std::size_t cols_;
  Matrix<double> t_;
  std::vector<long> basic_;
  std::vector<long> nonbasic_;
};

}  // namespace detail

/// maximize c.x  s.t.  A x <= b,  x >= 0.
inline Result maximize(const Matrix<double>& A, std::span<const double> b, std::span<const double> c) {
  if (b.size() != A.rows() || c.size() != A.cols())
    throw Error(ErrorCode::DimensionMismatch, "LP dimensions do not agree");
  return detail::Tableau(A, b, c).solve();
}

}  // namespace crw::lp

#endif  // CRW_LP_HPP
