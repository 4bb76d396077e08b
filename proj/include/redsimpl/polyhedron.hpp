#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "redsimpl/affine.hpp"
#include "redsimpl/error.hpp"
#include "redsimpl/ratlin.hpp"

namespace redsimpl {

/// Smallest size-parameter value geometric questions quantify over.
inline constexpr Int kDefaultMinSize = 4;

namespace fm {

// a . x + c >= 0 (or == 0) over integer variables.
struct Row {
  IntVector a;
  Int c = 0;
  bool eq = false;
};

/// A conjunction of integer linear constraints with Fourier-Motzkin
/// elimination. Rows are gcd-tightened, which is exact for integer variables
/// on every single-row step; the projection itself is the rational shadow.
class System {
 public:
  explicit System(std::size_t vars) : vars_(vars) {}

  std::size_t vars() const { return vars_; }
  bool infeasible() const { return infeasible_; }
  const std::vector<Row>& rows() const { return rows_; }

  void add(Row r) {
    if (infeasible_) return;
    if (!normalize(r)) {
      infeasible_ = true;
      return;
    }
    if (std::all_of(r.a.begin(), r.a.end(), [](Int x) { return x == 0; })) return;
    rows_.push_back(std::move(r));
  }

  bool involves(std::size_t v) const {
    return std::any_of(rows_.begin(), rows_.end(), [&](const Row& r) { return r.a[v] != 0; });
  }

  /// Projects out variable v; the column stays (all zero) so indices keep meaning.
  void eliminate(std::size_t v) {
    if (infeasible_) return;
    const Row* pivot = nullptr;
    for (const auto& r : rows_) {
      if (r.eq && r.a[v] != 0 && (pivot == nullptr || std::abs(r.a[v]) < std::abs(pivot->a[v]))) pivot = &r;
    }
    std::vector<Row> next;
    if (pivot != nullptr) {
      Row e = *pivot;
      Int ev = e.a[v];
      Int mag = ev < 0 ? -ev : ev;
      Int sgn = ev < 0 ? -1 : 1;
      bool skipped = false;
      for (const auto& r : rows_) {
        if (!skipped && &r == pivot) {
          skipped = true;
          continue;
        }
        if (r.a[v] == 0) {
          next.push_back(r);
          continue;
        }
        next.push_back(combine(r, mag, e, checked_mul(-sgn, r.a[v]), r.eq));
      }
    } else {
      std::vector<const Row*> lower, upper;
      for (const auto& r : rows_) {
        if (r.a[v] > 0)
          lower.push_back(&r);
        else if (r.a[v] < 0)
          upper.push_back(&r);
        else
          next.push_back(r);
      }
      for (const Row* lo : lower)
        for (const Row* up : upper) next.push_back(combine(*lo, -up->a[v], *up, lo->a[v], false));
    }
    rows_.clear();
    for (auto& r : next) add(std::move(r));
    simplify();
  }

  void eliminate_all() {
    for (std::size_t v = 0; v < vars_ && !infeasible_; ++v) eliminate(v);
  }

  /// Drops duplicate rows, keeps only the tightest row per linear part, and
  /// detects opposite pairs that contradict each other.
  void simplify() {
    if (infeasible_) return;
    std::map<IntVector, Int> ge;
    std::map<IntVector, Int> eqs;
    for (const auto& r : rows_) {
      if (r.eq) {
        auto [it, fresh] = eqs.emplace(r.a, r.c);
        if (!fresh && it->second != r.c) {
          infeasible_ = true;
          return;
        }
      } else {
        auto [it, fresh] = ge.emplace(r.a, r.c);
        if (!fresh) it->second = std::min(it->second, r.c);
      }
    }
    for (const auto& [a, c] : ge) {
      IntVector neg(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) neg[i] = -a[i];
      auto it = ge.find(neg);
      if (it != ge.end() && checked_add(c, it->second) < 0) {
        infeasible_ = true;
        return;
      }
    }
    rows_.clear();
    for (const auto& [a, c] : eqs) rows_.push_back(Row{a, c, true});
    for (const auto& [a, c] : ge) rows_.push_back(Row{a, c, false});
  }

 private:
  static Row combine(const Row& x, Int kx, const Row& y, Int ky, bool eq) {
    Row r;
    r.a.resize(x.a.size());
    for (std::size_t i = 0; i < x.a.size(); ++i) r.a[i] = checked_add(checked_mul(kx, x.a[i]), checked_mul(ky, y.a[i]));
    r.c = checked_add(checked_mul(kx, x.c), checked_mul(ky, y.c));
    r.eq = eq;
    return r;
  }

  // Returns false when the row alone is unsatisfiable.
  static bool normalize(Row& r) {
    Int g = 0;
    for (Int x : r.a) g = gcd_abs(g, x);
    if (g == 0) return r.eq ? r.c == 0 : r.c >= 0;
    if (r.eq) {
      if (r.c % g != 0) return false;
      for (Int& x : r.a) x /= g;
      r.c /= g;
      for (Int x : r.a) {
        if (x == 0) continue;
        if (x < 0) {
          for (Int& y : r.a) y = -y;
          r.c = -r.c;
        }
        break;
      }
      return true;
    }
    if (g > 1) {
      for (Int& x : r.a) x /= g;
      r.c = floor_div(r.c, g);
    }
    return true;
  }

  std::size_t vars_;
  std::vector<Row> rows_;
  bool infeasible_ = false;
};

}  // namespace fm

/// Integer points satisfying affine constraints over named index variables
/// and the single size parameter.
class ParamPolyhedron {
 public:
  ParamPolyhedron() = default;
  explicit ParamPolyhedron(std::vector<std::string> names, std::vector<Constraint> constraints = {},
                           std::string param = "N")
      : names_(std::move(names)), param_(std::move(param)) {
    for (auto& c : constraints) add(std::move(c));
  }

  static ParamPolyhedron universe(std::vector<std::string> names, std::string param = "N") {
    return ParamPolyhedron(std::move(names), {}, std::move(param));
  }

  const std::vector<std::string>& names() const { return names_; }
  const std::string& param_name() const { return param_; }
  std::size_t dims() const { return names_.size(); }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  std::size_t size() const { return constraints_.size(); }

  void add(Constraint c) {
    if (c.form.dims() != dims()) fail(ErrorCode::DimensionMismatch, "constraint arity differs from polyhedron");
    c = c.normalized();
    if (c.form.is_constant() && (c.is_eq() ? c.form.constant == 0 : c.form.constant >= 0)) return;
    if (std::find(constraints_.begin(), constraints_.end(), c) != constraints_.end()) return;
    constraints_.push_back(std::move(c));
  }

  ParamPolyhedron with(Constraint c) const {
    ParamPolyhedron p = *this;
    p.add(std::move(c));
    return p;
  }

  ParamPolyhedron intersect(const ParamPolyhedron& o) const {
    if (o.dims() != dims()) fail(ErrorCode::DimensionMismatch, "intersecting polyhedra of different arity");
    ParamPolyhedron p = *this;
    for (const auto& c : o.constraints_) p.add(c);
    return p;
  }

  ParamPolyhedron renamed(std::vector<std::string> names) const {
    ParamPolyhedron p = *this;
    if (names.size() != dims()) fail(ErrorCode::DimensionMismatch, "rename arity mismatch");
    p.names_ = std::move(names);
    return p;
  }

  ParamPolyhedron without(std::size_t which) const {
    ParamPolyhedron p = *this;
    p.constraints_.erase(p.constraints_.begin() + static_cast<std::ptrdiff_t>(which));
    return p;
  }

  bool contains(std::span<const Int> point, Int n) const {
    return std::all_of(constraints_.begin(), constraints_.end(), [&](const Constraint& c) { return c.holds(point, n); });
  }

  std::string to_string() const {
    std::string s = "{[";
    for (std::size_t i = 0; i < names_.size(); ++i) s += (i ? "," : "") + names_[i];
    s += "]";
    if (!constraints_.empty()) {
      s += " : ";
      for (std::size_t i = 0; i < constraints_.size(); ++i) {
        if (i) s += " and ";
        s += format_constraint(constraints_[i], names_, param_);
      }
    }
    return s + "}";
  }

  /// Integer system over [indices..., N] (param last) or [N, indices...].
  fm::System system(std::optional<Int> min_size, bool param_first = false) const {
    fm::System s(dims() + 1);
    std::size_t off = param_first ? 1 : 0;
    std::size_t pidx = param_first ? 0 : dims();
    for (const auto& c : constraints_) s.add(row_of(c.form, c.is_eq(), off, pidx));
    if (min_size) {
      fm::Row r;
      r.a.assign(dims() + 1, 0);
      r.a[pidx] = 1;
      r.c = -*min_size;
      s.add(std::move(r));
    }
    return s;
  }

  fm::Row row_of(const AffineForm& f, bool eq, std::size_t off, std::size_t pidx) const {
    fm::Row r;
    r.a.assign(dims() + 1, 0);
    for (std::size_t i = 0; i < dims(); ++i) r.a[i + off] = f.coeffs[i];
    r.a[pidx] = f.param;
    r.c = f.constant;
    r.eq = eq;
    return r;
  }

  bool operator==(const ParamPolyhedron& o) const {
    return names_ == o.names_ && param_ == o.param_ && constraints_ == o.constraints_;
  }

 private:
  std::vector<std::string> names_;
  std::string param_ = "N";
  std::vector<Constraint> constraints_;
};

/// True iff the polyhedron has no integer point for any N >= min_size, as
/// decided by gcd-tightened Fourier-Motzkin elimination.
inline bool is_empty(const ParamPolyhedron& p, Int min_size = kDefaultMinSize) {
  auto s = p.system(min_size);
  s.eliminate_all();
  return s.infeasible();
}

/// p implies c for every N >= min_size.
inline bool implies(const ParamPolyhedron& p, const Constraint& c, Int min_size = kDefaultMinSize) {
  auto strict_violation = [&](const AffineForm& f) { return is_empty(p.with(Constraint::ge((-f).shifted(-1))), min_size); };
  if (c.is_eq()) return strict_violation(c.form) && strict_violation(-c.form);
  return strict_violation(c.form);
}

/// p is a subset of q for every N >= min_size.
inline bool subset_of(const ParamPolyhedron& p, const ParamPolyhedron& q, Int min_size = kDefaultMinSize) {
  return std::all_of(q.constraints().begin(), q.constraints().end(),
                     [&](const Constraint& c) { return implies(p, c, min_size); });
}

/// Whether the values of `f` over p are bounded above by a constant
/// independent of N.
inline bool bounded_above_by_constant(const ParamPolyhedron& p, const AffineForm& f, Int min_size = kDefaultMinSize) {
  const std::size_t d = p.dims();
  fm::System s(d + 2);
  auto base = p.system(min_size);
  for (auto r : base.rows()) {
    r.a.push_back(0);
    s.add(std::move(r));
  }
  if (base.infeasible()) return true;
  fm::Row t;
  t.a.assign(d + 2, 0);
  for (std::size_t i = 0; i < d; ++i) t.a[i] = -f.coeffs[i];
  t.a[d] = -f.param;
  t.a[d + 1] = 1;
  t.c = -f.constant;
  t.eq = true;
  s.add(std::move(t));
  for (std::size_t v = 0; v <= d; ++v) s.eliminate(v);
  if (s.infeasible()) return true;
  return std::any_of(s.rows().begin(), s.rows().end(), [&](const fm::Row& r) { return r.eq || r.a[d + 1] < 0; });
}

/// Flags per constraint: equalities, implied equalities, and inequalities
/// whose opposite side is closed off by a parameter-free constant (the
/// "thick" pairs) are effectively saturated.
inline std::vector<bool> effectively_saturated(const ParamPolyhedron& p, Int min_size = kDefaultMinSize) {
  std::vector<bool> out(p.size(), false);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& c = p.constraints()[i];
    out[i] = c.is_eq() || bounded_above_by_constant(p, c.form, min_size);
  }
  return out;
}

/// Linear parts of the effectively saturated constraints.
inline std::vector<IntVector> saturated_normals(const ParamPolyhedron& p, Int min_size = kDefaultMinSize) {
  auto sat = effectively_saturated(p, min_size);
  std::vector<IntVector> rows;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (sat[i]) rows.push_back(p.constraints()[i].form.coeffs);
  return rows;
}

/// Index count less the rank of the effectively saturated constraints.
inline std::size_t dimension(const ParamPolyhedron& p, Int min_size = kDefaultMinSize) {
  if (is_empty(p, min_size)) fail(ErrorCode::EmptyDomain, "dimension of empty polyhedron " + p.to_string());
  auto rows = saturated_normals(p, min_size);
  if (rows.empty()) return p.dims();
  return p.dims() - rank(RatMatrix::from_rows(rows, p.dims()));
}

/// The face obtained by turning inequality `which` into an equality.
inline ParamPolyhedron saturate(const ParamPolyhedron& p, std::size_t which) {
  if (which >= p.size() || p.constraints()[which].is_eq())
    fail(ErrorCode::OutOfRange, "constraint " + std::to_string(which) + " is not an inequality of " + p.to_string());
  std::vector<Constraint> cs = p.constraints();
  cs[which] = Constraint::eq(cs[which].form);
  return ParamPolyhedron(p.names(), std::move(cs), p.param_name());
}

/// { z + rho : z in p }.
inline ParamPolyhedron translate(const ParamPolyhedron& p, std::span<const Int> rho) {
  if (rho.size() != p.dims()) fail(ErrorCode::DimensionMismatch, "translation vector length differs from index count");
  std::vector<Constraint> cs;
  for (const auto& c : p.constraints()) {
    Constraint t = c;
    t.form.constant = checked_sub(t.form.constant, dot(c.form.coeffs, rho));
    cs.push_back(t);
  }
  return ParamPolyhedron(p.names(), std::move(cs), p.param_name());
}

/// Drops inequalities implied by the rest, one at a time, and turns
/// inequalities whose negation is also implied into equalities.
inline ParamPolyhedron remove_redundant(const ParamPolyhedron& p, Int min_size = kDefaultMinSize) {
  ParamPolyhedron cur = p;
  for (std::size_t i = 0; i < cur.size();) {
    const auto c = cur.constraints()[i];
    auto rest = cur.without(i);
    if (implies(rest, c, min_size)) {
      cur = rest;
      continue;
    }
    if (!c.is_eq() && implies(cur, Constraint::ge(-c.form), min_size)) {
      std::vector<Constraint> cs = cur.constraints();
      cs[i] = Constraint::eq(c.form);
      cur = ParamPolyhedron(cur.names(), std::move(cs), cur.param_name());
    }
    ++i;
  }
  return cur;
}

/// Rational shadow of p on the kept index positions (in the given order).
inline ParamPolyhedron project(const ParamPolyhedron& p, const std::vector<std::size_t>& keep,
                               Int min_size = kDefaultMinSize) {
  auto s = p.system(std::nullopt);
  for (std::size_t v = 0; v < p.dims(); ++v)
    if (std::find(keep.begin(), keep.end(), v) == keep.end()) s.eliminate(v);
  std::vector<std::string> names;
  for (auto k : keep) names.push_back(p.names()[k]);
  ParamPolyhedron out(names, {}, p.param_name());
  if (s.infeasible()) {
    out.add(Constraint::ge(AffineForm::constant_form(keep.size(), -1)));
    return out;
  }
  // Lower bounds before upper bounds, outer indices first.
  auto rows = s.rows();
  auto key = [&](const fm::Row& r) {
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (r.a[keep[i]] != 0) return std::pair<std::size_t, int>(i, r.a[keep[i]] > 0 ? 0 : 1);
    return std::pair<std::size_t, int>(keep.size(), 0);
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const fm::Row& x, const fm::Row& y) { return key(x) < key(y); });
  for (const auto& r : rows) {
    AffineForm f(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) f.coeffs[i] = r.a[keep[i]];
    f.param = r.a[p.dims()];
    f.constant = r.c;
    out.add(r.eq ? Constraint::eq(f) : Constraint::ge(f));
  }
  return remove_redundant(out, min_size);
}

/// Preimage under z_old = subs(z_new): constraints rewritten in the new space.
inline ParamPolyhedron substitute(const ParamPolyhedron& p, const std::vector<AffineForm>& subs,
                                  std::vector<std::string> new_names) {
  ParamPolyhedron out(new_names, {}, p.param_name());
  for (const auto& c : p.constraints()) {
    AffineForm f = c.form.substitute(subs, new_names.size());
    out.add(c.is_eq() ? Constraint::eq(f) : Constraint::ge(f));
  }
  return out;
}

/// Loop-nest scanner built by projection: level k is bounded by the rows
/// that remain after eliminating every later loop variable. The first
/// `params` variables are fixed at scan time.
class Scanner {
 public:
  Scanner() = default;
  Scanner(fm::System sys, std::size_t params) : params_(params) {
    const std::size_t n = sys.vars();
    loops_ = n - params;
    levels_.resize(loops_);
    fm::System cur = std::move(sys);
    cur.simplify();
    for (std::size_t k = loops_; k-- > 0;) {
      const std::size_t v = params + k;
      if (cur.infeasible()) {
        empty_ = true;
        return;
      }
      auto& lvl = levels_[k];
      for (const auto& r : cur.rows()) {
        if (r.a[v] == 0) continue;
        if (r.a[v] > 0 || r.eq) lvl.lower.push_back(r);
        if (r.a[v] < 0 || r.eq) lvl.upper.push_back(r);
      }
      if (lvl.lower.empty() || lvl.upper.empty()) fail(ErrorCode::Unbounded, "loop variable " + std::to_string(k) + " has no finite bound");
      cur.eliminate(v);
    }
    if (cur.infeasible()) {
      empty_ = true;
      return;
    }
    guards_ = cur.rows();
  }

  std::size_t loops() const { return loops_; }

  /// Visits every integer point (loop variables only) in lexicographic order.
  template <class F>
  void for_each(std::span<const Int> params, F&& visit) const {
    if (empty_) return;
    std::vector<Int> x(params_ + loops_, 0);
    for (std::size_t i = 0; i < params_; ++i) x[i] = params[i];
    for (const auto& g : guards_)
      if (!holds(g, x)) return;
    if (loops_ == 0) {
      visit(std::span<const Int>(x.data() + params_, 0));
      return;
    }
    recurse(0, x, visit);
  }

  std::size_t count(std::span<const Int> params) const {
    std::size_t n = 0;
    for_each(params, [&](std::span<const Int>) { ++n; });
    return n;
  }

  /// Bounds of a loop level given the values already fixed in x.
  std::pair<Int, Int> bounds(std::size_t k, std::span<const Int> x) const {
    const std::size_t v = params_ + k;
    Int lo = std::numeric_limits<Int>::min(), hi = std::numeric_limits<Int>::max();
    for (const auto& r : levels_[k].lower) {
      Int a = r.a[v], rest = partial(r, x, v);
      if (a < 0) {
        a = -a;
        rest = -rest;
      }
      lo = std::max(lo, ceil_div(-rest, a));
    }
    for (const auto& r : levels_[k].upper) {
      Int a = r.a[v], rest = partial(r, x, v);
      if (a > 0) {
        a = -a;
        rest = -rest;
      }
      hi = std::min(hi, floor_div(rest, -a));
    }
    return {lo, hi};
  }

  struct Level {
    std::vector<fm::Row> lower, upper;
  };
  const std::vector<Level>& levels() const { return levels_; }
  const std::vector<fm::Row>& guards() const { return guards_; }
  bool trivially_empty() const { return empty_; }

 private:
  static Int partial(const fm::Row& r, std::span<const Int> x, std::size_t skip) {
    Int s = r.c;
    for (std::size_t i = 0; i < r.a.size(); ++i)
      if (i != skip && r.a[i] != 0) s = checked_add(s, checked_mul(r.a[i], x[i]));
    return s;
  }

  static bool holds(const fm::Row& r, std::span<const Int> x) {
    Int s = partial(r, x, r.a.size());
    return r.eq ? s == 0 : s >= 0;
  }

  template <class F>
  void recurse(std::size_t k, std::vector<Int>& x, F& visit) const {
    auto [lo, hi] = bounds(k, x);
    const std::size_t v = params_ + k;
    for (Int val = lo; val <= hi; ++val) {
      x[v] = val;
      if (k + 1 == loops_)
        visit(std::span<const Int>(x.data() + params_, loops_));
      else
        recurse(k + 1, x, visit);
    }
    x[v] = 0;
  }

  std::size_t params_ = 0;
  std::size_t loops_ = 0;
  std::vector<Level> levels_;
  std::vector<fm::Row> guards_;
  bool empty_ = false;
};

/// All integer points at N = n in lexicographic order.
inline std::vector<IntVector> enumerate_points(const ParamPolyhedron& p, Int n) {
  if (n < 0) fail(ErrorCode::OutOfRange, "size parameter must be non-negative");
  Scanner sc(p.system(std::nullopt, /*param_first=*/true), 1);
  std::vector<IntVector> out;
  Int params[1] = {n};
  sc.for_each(params, [&](std::span<const Int> z) { out.emplace_back(z.begin(), z.end()); });
  return out;
}

inline std::size_t count_points(const ParamPolyhedron& p, Int n) {
  Scanner sc(p.system(std::nullopt, /*param_first=*/true), 1);
  Int params[1] = {n};
  return sc.count(params);
}

/// Integer point of a parameter-free polyhedron minimizing the L1 norm; ties
/// go to the lexicographically largest vector. nullopt when p is empty.
inline std::optional<IntVector> smallest_point(const ParamPolyhedron& p, std::optional<std::size_t> radius_cap = {},
                                               Int min_size = kDefaultMinSize) {
  if (is_empty(p, min_size)) return std::nullopt;
  const std::size_t d = p.dims();
  const std::size_t cap = radius_cap.value_or(8 * std::max<std::size_t>(d, 1));
  IntVector x(d, 0);
  std::optional<IntVector> found;
  // Descending lexicographic walk over the L1 sphere of a given radius.
  std::function<bool(std::size_t, Int)> walk = [&](std::size_t k, Int budget) -> bool {
    if (k + 1 == d) {
      for (Int v : {budget, -budget}) {
        x[k] = v;
        if (p.contains(x, min_size)) {
          found = x;
          return true;
        }
        if (budget == 0) break;
      }
      return false;
    }
    for (Int v = budget; v >= -budget; --v) {
      x[k] = v;
      if (walk(k + 1, budget - (v < 0 ? -v : v))) return true;
    }
    return false;
  };
  if (d == 0) return IntVector{};
  for (std::size_t r = 0; r <= cap; ++r) {
    if (walk(0, static_cast<Int>(r))) return found;
  }
  fail(ErrorCode::RadiusExhausted, "no integer point within L1 radius " + std::to_string(cap) + " of the origin");
}

}  // namespace redsimpl
