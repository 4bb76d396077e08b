#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "redsimpl/affine.hpp"
#include "redsimpl/polyhedron.hpp"
#include "redsimpl/ratlin.hpp"

namespace redsimpl {

/// Size values programs must stay valid for.
inline constexpr Int kProgramMinSize = 1;

enum class Op { Add, Sub, Mul, Div, Min, Max };

inline std::string op_symbol(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Min: return "min";
    case Op::Max: return "max";
  }
  return "?";
}

inline std::optional<Op> op_from_symbol(const std::string& s) {
  for (Op op : {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Min, Op::Max})
    if (op_symbol(op) == s) return op;
  return std::nullopt;
}

/// Associative-commutative operators usable as reductions.
inline bool is_reduction_op(Op op) { return op == Op::Add || op == Op::Mul || op == Op::Min || op == Op::Max; }

/// The operator undoing `op`, if any. Division is available only when the
/// caller allows it.
inline std::optional<Op> inverse_of(Op op, bool allow_division = false) {
  if (op == Op::Add) return Op::Sub;
  if (op == Op::Mul && allow_division) return Op::Div;
  return std::nullopt;
}

/// Whether `outer` distributes over the reduction operator `red`.
inline bool distributes_over(Op outer, Op red, bool nonnegative_inputs = false) {
  if (outer == Op::Add) return red == Op::Min || red == Op::Max;
  if (outer == Op::Mul) return red == Op::Add || ((red == Op::Min || red == Op::Max) && nonnegative_inputs);
  return false;
}

enum class ScalarKind { Integer, Rational, Float };
enum class VarKind { Input, Output, Local };

inline std::string scalar_name(ScalarKind k) {
  switch (k) {
    case ScalarKind::Integer: return "int";
    case ScalarKind::Rational: return "rat";
    case ScalarKind::Float: return "float";
  }
  return "?";
}

inline std::string var_kind_name(VarKind k) {
  switch (k) {
    case VarKind::Input: return "input";
    case VarKind::Output: return "output";
    case VarKind::Local: return "local";
  }
  return "?";
}

/// Affine map from an index space of `in_dims` indices; one form per output.
struct AffineMap {
  std::size_t in_dims = 0;
  std::vector<AffineForm> rows;

  static AffineMap identity(std::size_t d) {
    AffineMap m{d, {}};
    for (std::size_t i = 0; i < d; ++i) m.rows.push_back(AffineForm::index(d, i));
    return m;
  }

  std::size_t out_dims() const { return rows.size(); }

  IntVector apply(std::span<const Int> z, Int n) const {
    IntVector out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.eval(z, n));
    return out;
  }

  /// (this o inner): first inner, then this.
  AffineMap compose(const AffineMap& inner) const {
    AffineMap m{inner.in_dims, {}};
    for (const auto& r : rows) m.rows.push_back(r.substitute(inner.rows, inner.in_dims));
    return m;
  }

  std::vector<IntVector> linear_rows() const {
    std::vector<IntVector> out;
    for (const auto& r : rows) out.push_back(r.coeffs);
    return out;
  }

  /// Source index per output when every output is a distinct plain index.
  std::optional<std::vector<std::size_t>> coordinate_indices() const {
    std::vector<std::size_t> out;
    std::set<std::size_t> seen;
    for (const auto& r : rows) {
      if (r.param != 0 || r.constant != 0) return std::nullopt;
      std::optional<std::size_t> which;
      for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
        if (r.coeffs[i] == 0) continue;
        if (r.coeffs[i] != 1 || which) return std::nullopt;
        which = i;
      }
      if (!which || !seen.insert(*which).second) return std::nullopt;
      out.push_back(*which);
    }
    return out;
  }

  bool operator==(const AffineMap&) const = default;
};

/// Preimage of a polyhedron under an affine map into a named space.
inline ParamPolyhedron preimage(const ParamPolyhedron& p, const AffineMap& m, std::vector<std::string> names) {
  return substitute(p, m.rows, std::move(names));
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct VarRead {
  std::string name;
  AffineMap access;
};

/// A scalar literal; `infinity` is +1 or -1 for the unbounded literals.
struct Const {
  Rational value = 0;
  int infinity = 0;
};

struct Binary {
  Op op;
  ExprPtr lhs, rhs;
};

struct CaseBranch {
  ParamPolyhedron guard;
  ExprPtr expr;
};

struct Case {
  std::vector<CaseBranch> branches;
};

/// op over { body(z) : z in body_domain, projection(z) = answer }.
struct Reduce {
  Op op;
  AffineMap projection;
  ParamPolyhedron body_domain;
  ExprPtr body;
};

struct Expr {
  std::variant<VarRead, Const, Binary, Case, Reduce> node;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
};

inline ExprPtr make_read(std::string name, AffineMap access) {
  return std::make_shared<const Expr>(Expr{VarRead{std::move(name), std::move(access)}});
}
inline ExprPtr make_const(Rational v) { return std::make_shared<const Expr>(Expr{Const{std::move(v), 0}}); }
inline ExprPtr make_infinity(int sign) { return std::make_shared<const Expr>(Expr{Const{0, sign < 0 ? -1 : 1}}); }
inline ExprPtr make_binary(Op op, ExprPtr l, ExprPtr r) {
  return std::make_shared<const Expr>(Expr{Binary{op, std::move(l), std::move(r)}});
}
inline ExprPtr make_case(std::vector<CaseBranch> branches) {
  return std::make_shared<const Expr>(Expr{Case{std::move(branches)}});
}
inline ExprPtr make_reduce(Op op, AffineMap proj, ParamPolyhedron dom, ExprPtr body) {
  return std::make_shared<const Expr>(Expr{Reduce{op, std::move(proj), std::move(dom), std::move(body)}});
}

/// Identity element of a reduction operator as a literal.
inline ExprPtr identity_of(Op op) {
  switch (op) {
    case Op::Add: return make_const(0);
    case Op::Mul: return make_const(1);
    case Op::Min: return make_infinity(+1);
    case Op::Max: return make_infinity(-1);
    default: fail(ErrorCode::InvalidProgram, "operator " + op_symbol(op) + " is not a reduction operator");
  }
}

struct VarDecl {
  std::string name;
  VarKind kind = VarKind::Local;
  ScalarKind scalar = ScalarKind::Integer;
  ParamPolyhedron domain;
};

struct Equation {
  std::string var;
  std::vector<std::string> indices;
  ExprPtr rhs;
};

struct Program {
  std::string param = "N";
  std::vector<VarDecl> vars;
  std::vector<Equation> equations;
  std::vector<std::string> provenance;

  const VarDecl* find_var(const std::string& name) const {
    for (const auto& v : vars)
      if (v.name == name) return &v;
    return nullptr;
  }

  const Equation* find_equation(const std::string& var) const {
    for (const auto& e : equations)
      if (e.var == var) return &e;
    return nullptr;
  }

  std::optional<std::size_t> equation_index(const std::string& var) const {
    for (std::size_t i = 0; i < equations.size(); ++i)
      if (equations[i].var == var) return i;
    return std::nullopt;
  }

  std::set<std::string> names() const {
    std::set<std::string> out;
    for (const auto& v : vars) out.insert(v.name);
    return out;
  }

  /// Scalar kind the whole program is evaluated in.
  ScalarKind scalar() const {
    ScalarKind k = ScalarKind::Integer;
    for (const auto& v : vars) {
      if (v.scalar == ScalarKind::Float) return ScalarKind::Float;
      if (v.scalar == ScalarKind::Rational) k = ScalarKind::Rational;
    }
    return k;
  }
};

/// Picks `base`, or base followed by a counter, avoiding `taken`.
inline std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
  if (!taken.count(base)) return base;
  for (int k = 2;; ++k) {
    std::string cand = base + std::to_string(k);
    if (!taken.count(cand)) return cand;
  }
}

/// Index names and domain in effect at some point of an expression tree.
struct Scope {
  std::vector<std::string> names;
  ParamPolyhedron domain;
};

/// Scope of an equation's right-hand side.
inline Scope equation_scope(const Program& p, const Equation& eq) {
  const VarDecl* v = p.find_var(eq.var);
  if (!v) fail(ErrorCode::InvalidProgram, "equation for undeclared variable " + eq.var);
  if (v->domain.dims() != eq.indices.size())
    fail(ErrorCode::InvalidProgram, "equation for " + eq.var + " has the wrong number of indices");
  return Scope{eq.indices, v->domain.renamed(eq.indices)};
}

/// Scope inside a reduction body given the scope of the reduction itself.
inline Scope body_scope(const Scope& outer, const Reduce& r) {
  auto names = r.body_domain.names();
  return Scope{names, r.body_domain.intersect(preimage(outer.domain, r.projection, names))};
}

inline Scope branch_scope(const Scope& outer, const CaseBranch& b) {
  return Scope{outer.names, outer.domain.intersect(b.guard.renamed(outer.names))};
}

/// A reduction (or any subexpression) addressed by equation and child path.
struct Site {
  std::size_t equation = 0;
  std::vector<std::size_t> path;
  bool operator==(const Site&) const = default;
};

inline const ExprPtr& child_at(const Expr& e, std::size_t k) {
  if (auto b = e.as<Binary>()) return k == 0 ? b->lhs : b->rhs;
  if (auto c = e.as<Case>()) return c->branches.at(k).expr;
  if (auto r = e.as<Reduce>()) return r->body;
  fail(ErrorCode::OutOfRange, "expression has no children");
}

inline std::size_t child_count(const Expr& e) {
  if (e.as<Binary>()) return 2;
  if (auto c = e.as<Case>()) return c->branches.size();
  if (e.as<Reduce>()) return 1;
  return 0;
}

inline Scope child_scope(const Scope& s, const Expr& e, std::size_t k) {
  if (auto c = e.as<Case>()) return branch_scope(s, c->branches.at(k));
  if (auto r = e.as<Reduce>()) return body_scope(s, *r);
  return s;
}

inline const ExprPtr& expr_at(const Program& p, const Site& site) {
  const ExprPtr* cur = &p.equations.at(site.equation).rhs;
  for (auto k : site.path) cur = &child_at(**cur, k);
  return *cur;
}

inline Scope scope_at(const Program& p, const Site& site) {
  const auto& eq = p.equations.at(site.equation);
  Scope s = equation_scope(p, eq);
  const ExprPtr* cur = &eq.rhs;
  for (auto k : site.path) {
    s = child_scope(s, **cur, k);
    cur = &child_at(**cur, k);
  }
  return s;
}

inline ExprPtr with_child(const Expr& e, std::size_t k, ExprPtr child) {
  if (auto b = e.as<Binary>()) return make_binary(b->op, k == 0 ? child : b->lhs, k == 1 ? child : b->rhs);
  if (auto c = e.as<Case>()) {
    auto br = c->branches;
    br.at(k).expr = std::move(child);
    return make_case(std::move(br));
  }
  if (auto r = e.as<Reduce>()) return make_reduce(r->op, r->projection, r->body_domain, std::move(child));
  fail(ErrorCode::OutOfRange, "expression has no children");
}

inline ExprPtr replace_at(const ExprPtr& root, std::span<const std::size_t> path, ExprPtr repl) {
  if (path.empty()) return repl;
  return with_child(*root, path[0], replace_at(child_at(*root, path[0]), path.subspan(1), std::move(repl)));
}

inline Program replace_at(const Program& p, const Site& site, ExprPtr repl) {
  Program q = p;
  auto& eq = q.equations.at(site.equation);
  eq.rhs = replace_at(eq.rhs, site.path, std::move(repl));
  return q;
}

/// Pre-order walk with paths.
template <class F>
void walk(const ExprPtr& e, std::vector<std::size_t>& path, F&& visit) {
  visit(*e, path);
  for (std::size_t k = 0; k < child_count(*e); ++k) {
    path.push_back(k);
    walk(child_at(*e, k), path, visit);
    path.pop_back();
  }
}

/// Every reduction in equation order, pre-order within each equation.
inline std::vector<Site> reduce_sites(const Program& p) {
  std::vector<Site> out;
  for (std::size_t i = 0; i < p.equations.size(); ++i) {
    std::vector<std::size_t> path;
    walk(p.equations[i].rhs, path, [&](const Expr& e, const std::vector<std::size_t>& at) {
      if (e.as<Reduce>()) out.push_back(Site{i, at});
    });
  }
  return out;
}

/// Rewrites every index expression of `e` for the substitution old = subs(new).
inline ExprPtr substitute_indices(const ExprPtr& e, const std::vector<AffineForm>& subs,
                                  const std::vector<std::string>& new_names) {
  const std::size_t nd = new_names.size();
  if (auto v = e->as<VarRead>()) {
    AffineMap m{nd, {}};
    for (const auto& r : v->access.rows) m.rows.push_back(r.substitute(subs, nd));
    return make_read(v->name, std::move(m));
  }
  if (e->as<Const>()) return e;
  if (auto b = e->as<Binary>())
    return make_binary(b->op, substitute_indices(b->lhs, subs, new_names), substitute_indices(b->rhs, subs, new_names));
  if (auto c = e->as<Case>()) {
    std::vector<CaseBranch> br;
    for (const auto& x : c->branches)
      br.push_back(CaseBranch{substitute(x.guard, subs, new_names), substitute_indices(x.expr, subs, new_names)});
    return make_case(std::move(br));
  }
  const auto& r = *e->as<Reduce>();
  // The body keeps its own index space; only its projection (and the
  // parameter-free constants) tie it to the outer indices. Rebuild the body
  // space as [new outer indices..., body locals...] when the projection is a
  // coordinate projection.
  auto coords = r.projection.coordinate_indices();
  if (!coords) fail(ErrorCode::NonCanonicalProjection, "cannot re-index a reduction whose projection is not a coordinate projection");
  const auto& bnames = r.body_domain.names();
  std::vector<std::size_t> locals;
  for (std::size_t i = 0; i < bnames.size(); ++i)
    if (std::find(coords->begin(), coords->end(), i) == coords->end()) locals.push_back(i);
  std::set<std::string> taken(new_names.begin(), new_names.end());
  std::vector<std::string> names = new_names;
  for (auto l : locals) {
    std::string nm = fresh_name(bnames[l], taken);
    taken.insert(nm);
    names.push_back(nm);
  }
  const std::size_t bd = names.size();
  std::vector<AffineForm> inner(bnames.size(), AffineForm(bd));
  for (std::size_t k = 0; k < coords->size(); ++k) {
    AffineForm f = subs[k];
    f.coeffs.resize(bd, 0);
    inner[(*coords)[k]] = f;
  }
  for (std::size_t k = 0; k < locals.size(); ++k) inner[locals[k]] = AffineForm::index(bd, nd + k);
  AffineMap proj{bd, {}};
  for (std::size_t i = 0; i < nd; ++i) proj.rows.push_back(AffineForm::index(bd, i));
  return make_reduce(r.op, std::move(proj), substitute(r.body_domain, inner, names), substitute_indices(r.body, inner, names));
}

/// Linear parts of every index-dependent quantity a reduction body's value
/// hangs on: read accesses, case guards, and (opaquely) nested reductions.
inline std::vector<IntVector> dependence_rows(const Reduce& r) {
  const std::size_t d = r.body_domain.dims();
  std::vector<IntVector> rows;
  std::function<void(const ExprPtr&)> go = [&](const ExprPtr& e) {
    if (auto v = e->as<VarRead>()) {
      for (const auto& row : v->access.rows) rows.push_back(row.coeffs);
    } else if (auto b = e->as<Binary>()) {
      go(b->lhs);
      go(b->rhs);
    } else if (auto c = e->as<Case>()) {
      for (const auto& br : c->branches) {
        for (const auto& g : br.guard.constraints()) rows.push_back(g.form.coeffs);
        go(br.expr);
      }
    } else if (e->as<Reduce>()) {
      for (std::size_t i = 0; i < d; ++i) {
        IntVector u(d, 0);
        u[i] = 1;
        rows.push_back(u);
      }
    }
  };
  go(r.body);
  return rows;
}

/// Dependence map of a reduction: the stacked read accesses of its body.
inline AffineMap dependence_map(const Reduce& r) {
  const std::size_t d = r.body_domain.dims();
  AffineMap m{d, {}};
  std::function<void(const ExprPtr&)> go = [&](const ExprPtr& e) {
    if (auto v = e->as<VarRead>()) {
      for (const auto& row : v->access.rows) m.rows.push_back(row);
    } else if (auto b = e->as<Binary>()) {
      go(b->lhs);
      go(b->rhs);
    } else if (auto c = e->as<Case>()) {
      for (const auto& br : c->branches) go(br.expr);
    } else if (e->as<Reduce>()) {
      fail(ErrorCode::NonAffineAccess, "reduction body contains a nested reduction");
    }
  };
  go(r.body);
  return m;
}

struct ReuseSpace {
  std::vector<IntVector> basis;
  std::size_t dim() const { return basis.size(); }
};

inline ReuseSpace reuse_space(const Reduce& r) {
  const std::size_t d = r.body_domain.dims();
  auto rows = dependence_rows(r);
  if (rows.empty()) {
    ReuseSpace s;
    for (std::size_t i = 0; i < d; ++i) {
      IntVector u(d, 0);
      u[i] = 1;
      s.basis.push_back(u);
    }
    return s;
  }
  return ReuseSpace{null_space_basis(RatMatrix::from_rows(rows, d))};
}

/// Null space of the projection: directions that accumulate into one answer.
inline std::vector<IntVector> accumulation_space(const Reduce& r) {
  const std::size_t d = r.body_domain.dims();
  auto rows = r.projection.linear_rows();
  if (rows.empty()) return null_space_basis(RatMatrix(0, d));
  return null_space_basis(RatMatrix::from_rows(rows, d));
}

}  // namespace redsimpl
