#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "redsimpl/error.hpp"

namespace redsimpl {

using Int = std::int64_t;
using Rational = mpq_class;
using IntVector = std::vector<Int>;

// Checked 64-bit helpers. Coefficients in this domain are tiny; an overflow
// means a construction bug, so it is reported instead of wrapping.
inline Int checked_add(Int a, Int b) {
  Int r;
  if (__builtin_add_overflow(a, b, &r)) fail(ErrorCode::Overflow, "integer addition overflow");
  return r;
}

inline Int checked_sub(Int a, Int b) {
  Int r;
  if (__builtin_sub_overflow(a, b, &r)) fail(ErrorCode::Overflow, "integer subtraction overflow");
  return r;
}

inline Int checked_mul(Int a, Int b) {
  Int r;
  if (__builtin_mul_overflow(a, b, &r)) fail(ErrorCode::Overflow, "integer multiplication overflow");
  return r;
}

inline Int gcd_abs(Int a, Int b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

/// Floor division for possibly negative operands.
inline Int floor_div(Int a, Int b) {
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline Int ceil_div(Int a, Int b) { return -floor_div(-a, b); }

inline Int dot(std::span<const Int> a, std::span<const Int> b) {
  Int s = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) s = checked_add(s, checked_mul(a[i], b[i]));
  return s;
}

inline Int to_int(const mpz_class& z) {
  if (!z.fits_slong_p()) fail(ErrorCode::Overflow, "integer does not fit in 64 bits");
  return z.get_si();
}

/// Scales a rational vector to its primitive integer representative: common
/// denominator cleared, component gcd 1, first nonzero component positive.
inline IntVector primitive(std::span<const Rational> v) {
  mpz_class den = 1;
  for (const auto& x : v) den = lcm(den, mpz_class(x.get_den()));
  std::vector<mpz_class> num;
  num.reserve(v.size());
  mpz_class g = 0;
  for (const auto& x : v) {
    mpz_class n = x.get_num() * (den / x.get_den());
    g = gcd(g, n);
    num.push_back(n);
  }
  IntVector out(v.size(), 0);
  if (g == 0) return out;
  int sign = 0;
  for (const auto& n : num) {
    if (n != 0) {
      sign = n > 0 ? 1 : -1;
      break;
    }
  }
  for (std::size_t i = 0; i < num.size(); ++i) out[i] = to_int(num[i] / g * sign);
  return out;
}

inline IntVector primitive(std::span<const Int> v) {
  std::vector<Rational> r(v.begin(), v.end());
  return primitive(std::span<const Rational>(r));
}

/// Dense matrix of exact rationals. Dimensions are fixed at construction.
class RatMatrix {
 public:
  RatMatrix() = default;
  RatMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  static RatMatrix from_rows(const std::vector<IntVector>& rows, std::size_t cols) {
    RatMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != cols) fail(ErrorCode::DimensionMismatch, "ragged matrix rows");
      for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = rows[r][c];
    }
    return m;
  }

  static RatMatrix identity(std::size_t n) {
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<Rational> multiply(std::span<const Rational> x) const {
    std::vector<Rational> out(rows_, 0);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out[r] += at(r, c) * x[c];
    return out;
  }

  /// Reduced row echelon form in place; returns pivot column per pivot row.
  std::vector<std::size_t> rref() {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols_ && row < rows_; ++col) {
      std::size_t sel = row;
      while (sel < rows_ && at(sel, col) == 0) ++sel;
      if (sel == rows_) continue;
      if (sel != row)
        for (std::size_t c = 0; c < cols_; ++c) std::swap(at(sel, c), at(row, c));
      Rational inv = 1 / at(row, col);
      for (std::size_t c = 0; c < cols_; ++c) at(row, c) *= inv;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (r == row || at(r, col) == 0) continue;
        Rational f = at(r, col);
        for (std::size_t c = 0; c < cols_; ++c) at(r, c) -= f * at(row, c);
      }
      pivots.push_back(col);
      ++row;
    }
    return pivots;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

inline std::size_t rank(RatMatrix m) { return m.rref().size(); }

/// Basis of the right null space, each vector primitive and sign-normalized.
/// Vectors come out in order of the free columns, so results are stable.
inline std::vector<IntVector> null_space_basis(RatMatrix m) {
  auto pivots = m.rref();
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<IntVector> basis;
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rational> v(m.cols(), 0);
    v[free] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m.at(r, free);
    basis.push_back(primitive(std::span<const Rational>(v)));
  }
  return basis;
}

/// One exact solution of m x = b, or nullopt when the system is inconsistent.
inline std::optional<std::vector<Rational>> solve_rational(const RatMatrix& m, std::span<const Rational> b) {
  if (b.size() != m.rows()) fail(ErrorCode::DimensionMismatch, "right-hand side length differs from row count");
  RatMatrix aug(m.rows(), m.cols() + 1);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) aug.at(r, c) = m.at(r, c);
    aug.at(r, m.cols()) = b[r];
  }
  auto pivots = aug.rref();
  if (!pivots.empty() && pivots.back() == m.cols()) return std::nullopt;
  std::vector<Rational> x(m.cols(), 0);
  for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug.at(r, m.cols());
  return x;
}

inline std::string format_vector(std::span<const Int> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s + "]";
}

}  // namespace redsimpl
