#pragma once

#include <algorithm>
#include <compare>
#include <span>
#include <string>
#include <vector>

#include "redsimpl/ratlin.hpp"

namespace redsimpl {

/// An integer affine expression over index variables and the size parameter:
/// coeffs . z + param * N + constant.
struct AffineForm {
  IntVector coeffs;
  Int param = 0;
  Int constant = 0;

  AffineForm() = default;
  explicit AffineForm(std::size_t dims) : coeffs(dims, 0) {}
  AffineForm(IntVector c, Int p, Int k) : coeffs(std::move(c)), param(p), constant(k) {}

  static AffineForm index(std::size_t dims, std::size_t which) {
    AffineForm f(dims);
    f.coeffs[which] = 1;
    return f;
  }
  static AffineForm constant_form(std::size_t dims, Int k) {
    AffineForm f(dims);
    f.constant = k;
    return f;
  }

  std::size_t dims() const { return coeffs.size(); }

  bool is_constant() const {
    return param == 0 && std::all_of(coeffs.begin(), coeffs.end(), [](Int c) { return c == 0; });
  }
  bool linear_is_zero() const {
    return std::all_of(coeffs.begin(), coeffs.end(), [](Int c) { return c == 0; });
  }

  Int eval(std::span<const Int> point, Int n) const {
    Int s = checked_add(checked_mul(param, n), constant);
    for (std::size_t i = 0; i < coeffs.size(); ++i) s = checked_add(s, checked_mul(coeffs[i], point[i]));
    return s;
  }

  AffineForm operator+(const AffineForm& o) const {
    AffineForm r(dims());
    for (std::size_t i = 0; i < dims(); ++i) r.coeffs[i] = checked_add(coeffs[i], o.coeffs[i]);
    r.param = checked_add(param, o.param);
    r.constant = checked_add(constant, o.constant);
    return r;
  }
  AffineForm operator-(const AffineForm& o) const { return *this + o.scaled(-1); }
  AffineForm operator-() const { return scaled(-1); }

  AffineForm scaled(Int k) const {
    AffineForm r(dims());
    for (std::size_t i = 0; i < dims(); ++i) r.coeffs[i] = checked_mul(coeffs[i], k);
    r.param = checked_mul(param, k);
    r.constant = checked_mul(constant, k);
    return r;
  }

  AffineForm shifted(Int k) const {
    AffineForm r = *this;
    r.constant = checked_add(r.constant, k);
    return r;
  }

  /// Composition with an affine substitution z_i = subs[i](w), where every
  /// subs[i] lives in the new space.
  AffineForm substitute(const std::vector<AffineForm>& subs, std::size_t new_dims) const {
    AffineForm r(new_dims);
    r.param = param;
    r.constant = constant;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      if (coeffs[i] == 0) continue;
      r = r + subs[i].scaled(coeffs[i]);
    }
    return r;
  }

  auto operator<=>(const AffineForm&) const = default;
  bool operator==(const AffineForm&) const = default;
};

/// Text for an affine form using the given index names, e.g. "i - j + 1".
inline std::string format_affine(const AffineForm& f, const std::vector<std::string>& names,
                                 const std::string& param_name) {
  std::string out;
  auto term = [&](Int c, const std::string& name) {
    if (c == 0) return;
    Int mag = c < 0 ? -c : c;
    if (out.empty())
      out += c < 0 ? "-" : "";
    else
      out += c < 0 ? " - " : " + ";
    if (name.empty()) {
      out += std::to_string(mag);
    } else {
      if (mag != 1) out += std::to_string(mag) + "*";
      out += name;
    }
  };
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) term(f.coeffs[i], names[i]);
  term(f.param, param_name);
  term(f.constant, "");
  return out.empty() ? "0" : out;
}

enum class ConstraintKind { GE, EQ };

/// form >= 0 or form = 0.
struct Constraint {
  AffineForm form;
  ConstraintKind kind = ConstraintKind::GE;

  static Constraint ge(AffineForm f) { return Constraint{std::move(f), ConstraintKind::GE}.normalized(); }
  static Constraint eq(AffineForm f) { return Constraint{std::move(f), ConstraintKind::EQ}.normalized(); }

  bool is_eq() const { return kind == ConstraintKind::EQ; }

  /// GE: divide by the gcd of the variable and parameter coefficients and
  /// floor the constant. EQ: divide by the gcd when it divides the constant,
  /// then make the first nonzero coefficient positive.
  Constraint normalized() const {
    Constraint c = *this;
    Int g = 0;
    for (Int x : c.form.coeffs) g = gcd_abs(g, x);
    g = gcd_abs(g, c.form.param);
    if (g == 0) return c;
    if (kind == ConstraintKind::GE) {
      if (g > 1) {
        for (Int& x : c.form.coeffs) x /= g;
        c.form.param /= g;
        c.form.constant = floor_div(c.form.constant, g);
      }
      return c;
    }
    if (g > 1 && c.form.constant % g == 0) {
      for (Int& x : c.form.coeffs) x /= g;
      c.form.param /= g;
      c.form.constant /= g;
    }
    Int lead = 0;
    for (Int x : c.form.coeffs)
      if (x != 0) {
        lead = x;
        break;
      }
    if (lead == 0) lead = c.form.param;
    if (lead < 0) c.form = -c.form;
    return c;
  }

  bool holds(std::span<const Int> point, Int n) const {
    Int v = form.eval(point, n);
    return is_eq() ? v == 0 : v >= 0;
  }

  auto operator<=>(const Constraint&) const = default;
  bool operator==(const Constraint&) const = default;
};

/// Renders a constraint in the comparison style used by the set syntax:
/// "0 <= j", "j <= i", "i < N", "i = 0".
inline std::string format_constraint(const Constraint& c, const std::vector<std::string>& names,
                                     const std::string& param_name) {
  AffineForm pos(c.form.dims()), neg(c.form.dims());
  for (std::size_t i = 0; i < c.form.dims(); ++i) {
    if (c.form.coeffs[i] > 0) pos.coeffs[i] = c.form.coeffs[i];
    if (c.form.coeffs[i] < 0) neg.coeffs[i] = -c.form.coeffs[i];
  }
  if (c.form.param > 0) pos.param = c.form.param;
  if (c.form.param < 0) neg.param = -c.form.param;
  if (c.form.constant > 0) pos.constant = c.form.constant;
  if (c.form.constant < 0) neg.constant = -c.form.constant;
  if (c.is_eq()) {
    // Put the side carrying index variables on the left.
    if (pos.linear_is_zero() && !neg.linear_is_zero()) std::swap(pos, neg);
    return format_affine(pos, names, param_name) + " = " + format_affine(neg, names, param_name);
  }
  if (neg.constant >= 1) {
    neg.constant -= 1;
    return format_affine(neg, names, param_name) + " < " + format_affine(pos, names, param_name);
  }
  return format_affine(neg, names, param_name) + " <= " + format_affine(pos, names, param_name);
}

}  // namespace redsimpl
