#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "redsimpl/ir.hpp"
#include "redsimpl/polyhedron.hpp"

namespace redsimpl {

/// Polynomial in N whose coefficients depend on N mod period; coefficient
/// lists run from the constant term upward.
class QuasiPolynomial {
 public:
  QuasiPolynomial() : coeffs_(1) {}
  QuasiPolynomial(std::size_t period, std::vector<std::vector<Rational>> coeffs)
      : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != period) fail(ErrorCode::DimensionMismatch, "one coefficient list per residue is required");
    trim();
  }

  static QuasiPolynomial polynomial(std::vector<Rational> coeffs) { return QuasiPolynomial(1, {std::move(coeffs)}); }

  std::size_t period() const { return coeffs_.size(); }

  /// Smallest N at which the values are known to be exact.
  Int valid_from() const { return valid_from_; }
  QuasiPolynomial& set_valid_from(Int n) {
    valid_from_ = n;
    return *this;
  }
  const std::vector<std::vector<Rational>>& coefficients() const { return coeffs_; }

  const std::vector<Rational>& residue(Int n) const {
    Int q = static_cast<Int>(coeffs_.size());
    return coeffs_[static_cast<std::size_t>(((n % q) + q) % q)];
  }

  Rational operator()(Int n) const {
    Rational acc = 0, pw = 1;
    for (const auto& c : residue(n)) {
      acc += c * pw;
      pw *= static_cast<long>(n);
    }
    return acc;
  }

  std::size_t degree() const {
    std::size_t d = 0;
    for (const auto& r : coeffs_)
      for (std::size_t k = 0; k < r.size(); ++k)
        if (r[k] != 0) d = std::max(d, k);
    return d;
  }

  /// Coefficient of N^degree; equal across residues for counts of polyhedra.
  Rational leading() const {
    std::size_t d = degree();
    const auto& r = coeffs_.front();
    return d < r.size() ? r[d] : Rational(0);
  }

  QuasiPolynomial operator+(const QuasiPolynomial& o) const {
    std::size_t q = std::lcm(period(), o.period());
    std::vector<std::vector<Rational>> out(q);
    for (std::size_t r = 0; r < q; ++r) {
      const auto& a = coeffs_[r % period()];
      const auto& b = o.coeffs_[r % o.period()];
      out[r].assign(std::max(a.size(), b.size()), 0);
      for (std::size_t k = 0; k < a.size(); ++k) out[r][k] += a[k];
      for (std::size_t k = 0; k < b.size(); ++k) out[r][k] += b[k];
    }
    QuasiPolynomial sum(q, std::move(out));
    sum.valid_from_ = std::max(valid_from_, o.valid_from_);
    return sum;
  }

  bool operator==(const QuasiPolynomial& o) const { return coeffs_ == o.coeffs_; }

  std::string to_string(const std::string& param = "N") const {
    auto poly = [&](const std::vector<Rational>& c) {
      std::string s;
      for (std::size_t k = c.size(); k-- > 0;) {
        if (c[k] == 0) continue;
        Rational mag = abs(c[k]);
        if (s.empty())
          s += c[k] < 0 ? "-" : "";
        else
          s += c[k] < 0 ? " - " : " + ";
        bool unit = mag == 1 && k > 0;
        if (!unit) s += mag.get_str();
        if (k > 0) s += (unit ? "" : "*") + param + (k > 1 ? "^" + std::to_string(k) : "");
      }
      return s.empty() ? std::string("0") : s;
    };
    if (coeffs_.size() == 1) return poly(coeffs_[0]);
    std::string s;
    for (std::size_t r = 0; r < coeffs_.size(); ++r) {
      if (r) s += "; ";
      s += poly(coeffs_[r]) + " if " + param + " % " + std::to_string(coeffs_.size()) + " == " + std::to_string(r);
    }
    return s;
  }

 private:
  // Collapses identical residues and strips trailing zero coefficients.
  void trim() {
    for (auto& r : coeffs_)
      while (!r.empty() && r.back() == 0) r.pop_back();
    while (coeffs_.size() > 1) {
      std::size_t half = coeffs_.size() / 2;
      if (coeffs_.size() % 2 != 0) break;
      bool same = true;
      for (std::size_t r = 0; r < half; ++r) same &= coeffs_[r] == coeffs_[r + half];
      if (!same) break;
      coeffs_.resize(half);
    }
    if (coeffs_.size() > 1 && std::all_of(coeffs_.begin(), coeffs_.end(), [&](const auto& r) { return r == coeffs_[0]; }))
      coeffs_.resize(1);
  }

  std::vector<std::vector<Rational>> coeffs_;
  Int valid_from_ = 0;
};

struct CountOptions {
  Int first_size = 4;
  std::size_t period = 2;
  std::size_t held_out = 2;
};

namespace detail {

// Degree-d polynomial through (x_k, y_k), exact.
inline std::vector<Rational> interpolate(const std::vector<Int>& xs, const std::vector<Rational>& ys) {
  const std::size_t m = xs.size();
  RatMatrix v(m, m);
  for (std::size_t r = 0; r < m; ++r) {
    Rational pw = 1;
    for (std::size_t c = 0; c < m; ++c) {
      v.at(r, c) = pw;
      pw *= static_cast<long>(xs[r]);
    }
  }
  auto sol = solve_rational(v, ys);
  if (!sol) fail(ErrorCode::FitMismatch, "interpolation system is singular");
  return *sol;
}

inline std::optional<QuasiPolynomial> fit_once(const std::function<Rational(Int)>& f, std::size_t degree, std::size_t q,
                                               Int n0, std::size_t held_out) {
  std::vector<std::vector<Rational>> coeffs(q);
  const Int last = n0 + static_cast<Int>(q * (degree + 1));
  for (std::size_t r = 0; r < q; ++r) {
    std::vector<Int> xs;
    std::vector<Rational> ys;
    for (Int n = n0; n <= last && xs.size() < degree + 1; ++n) {
      if (static_cast<std::size_t>(((n % static_cast<Int>(q)) + static_cast<Int>(q)) % static_cast<Int>(q)) != r) continue;
      xs.push_back(n);
      ys.push_back(f(n));
    }
    coeffs[r] = interpolate(xs, ys);
  }
  QuasiPolynomial qp(q, std::move(coeffs));
  for (std::size_t h = 1; h <= held_out * q; ++h) {
    Int n = last + static_cast<Int>(h);
    if (qp(n) != f(n)) return std::nullopt;
  }
  qp.set_valid_from(n0);
  return qp;
}

}  // namespace detail

/// Fits an exact quasi-polynomial of the given degree to f, trying the
/// configured period first and period 4 (and a later start) on failure.
inline QuasiPolynomial fit_quasi_polynomial(const std::function<Rational(Int)>& f, std::size_t degree,
                                            const CountOptions& opt = {}) {
  std::vector<std::pair<std::size_t, Int>> attempts = {
      {opt.period, opt.first_size}, {4, opt.first_size}, {4, opt.first_size + 8}, {4, opt.first_size + 24}};
  for (auto [q, n0] : attempts)
    if (auto qp = detail::fit_once(f, degree, q, n0, opt.held_out)) return *qp;
  fail(ErrorCode::FitMismatch, "no quasi-polynomial of degree " + std::to_string(degree) + " matches held-out sizes");
}

/// Number of integer points of p as an exact quasi-polynomial in N.
inline QuasiPolynomial cardinality(const ParamPolyhedron& p, const CountOptions& opt = {}) {
  std::size_t d = is_empty(p, opt.first_size) ? 0 : dimension(p, opt.first_size);
  return fit_quasi_polynomial([&](Int n) { return Rational(static_cast<long>(count_points(p, n))); }, d, opt);
}

struct EquationCount {
  std::string var;
  QuasiPolynomial values;                // points of the variable's domain
  std::vector<QuasiPolynomial> bodies;   // one per reduction, in traversal order
  QuasiPolynomial total;
};

struct ComplexityReport {
  std::vector<EquationCount> equations;
  QuasiPolynomial total;
  std::size_t degree() const { return total.degree(); }
};

/// Computed values plus reduction body points, per equation and in total.
inline ComplexityReport program_ops(const Program& p, const CountOptions& opt = {}) {
  ComplexityReport rep;
  auto sites = reduce_sites(p);
  for (std::size_t i = 0; i < p.equations.size(); ++i) {
    const auto& eq = p.equations[i];
    EquationCount ec;
    ec.var = eq.var;
    ec.values = cardinality(p.find_var(eq.var)->domain, opt);
    ec.total = ec.values;
    for (const auto& s : sites) {
      if (s.equation != i) continue;
      const auto& r = *expr_at(p, s)->as<Reduce>();
      auto body = body_scope(scope_at(p, s), r).domain;
      ec.bodies.push_back(cardinality(body, opt));
      ec.total = ec.total + ec.bodies.back();
    }
    rep.total = rep.total + ec.total;
    rep.equations.push_back(std::move(ec));
  }
  return rep;
}

/// Least-squares slope of log(ops) against log(N) over the larger half of
/// the samples.
inline double measured_degree(std::vector<std::pair<Int, double>> samples) {
  if (samples.size() < 4) fail(ErrorCode::InsufficientSamples, "at least four samples are needed");
  std::sort(samples.begin(), samples.end());
  std::size_t start = samples.size() / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double m = static_cast<double>(samples.size() - start);
  for (std::size_t i = start; i < samples.size(); ++i) {
    double x = std::log(static_cast<double>(samples[i].first));
    double y = std::log(samples[i].second);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

template <class Count>
double measured_degree(const std::vector<std::pair<Int, Count>>& samples) {
  std::vector<std::pair<Int, double>> s;
  for (const auto& [n, c] : samples) s.emplace_back(n, static_cast<double>(c));
  return measured_degree(std::move(s));
}

}  // namespace redsimpl
