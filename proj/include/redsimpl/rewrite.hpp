#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "redsimpl/frontend.hpp"
#include "redsimpl/ir.hpp"
#include "redsimpl/polyhedron.hpp"
#include "redsimpl/validate.hpp"

namespace redsimpl {

/// Answer coordinates of a reduction inside its body space.
inline std::vector<std::size_t> answer_coords(const Reduce& r) {
  auto c = r.projection.coordinate_indices();
  if (!c) fail(ErrorCode::NonCanonicalProjection, "projection is not a coordinate projection");
  return *c;
}

/// Body indices that are not answer coordinates, in body order.
inline std::vector<std::size_t> local_indices(const Reduce& r) {
  auto coords = answer_coords(r);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < r.body_domain.dims(); ++i)
    if (std::find(coords.begin(), coords.end(), i) == coords.end()) out.push_back(i);
  return out;
}

/// Body domain restricted to the answers that are actually demanded.
inline ParamPolyhedron effective_body(const Scope& s, const Reduce& r) {
  return remove_redundant(body_scope(s, r).domain, kProgramMinSize);
}

/// Points per answer: body dimension minus the dimension of its image.
inline std::size_t fiber_dimension(const ParamPolyhedron& body, const std::vector<std::size_t>& coords) {
  if (is_empty(body, kDefaultMinSize)) return 0;
  auto image = project(body, coords, kProgramMinSize);
  return dimension(body) - dimension(image);
}

inline std::set<std::string> taken_names(const Program& p) {
  auto out = p.names();
  out.insert(p.param);
  return out;
}

/// Scalar kind for a local that stores values of `var`'s equation.
inline ScalarKind scalar_of(const Program& p, const std::string& var) {
  const VarDecl* v = p.find_var(var);
  return v ? v->scalar : p.scalar();
}

inline void add_local(Program& p, const std::string& name, ScalarKind scalar, const ParamPolyhedron& domain,
                      ExprPtr rhs) {
  p.vars.push_back(VarDecl{name, VarKind::Local, scalar, domain});
  p.equations.push_back(Equation{name, domain.names(), std::move(rhs)});
}

inline bool reads_anywhere(const Program& p, const std::string& var, std::optional<std::size_t> skip = {}) {
  for (std::size_t i = 0; i < p.equations.size(); ++i)
    if (i != skip && detail::reads_var(p.equations[i].rhs, var)) return true;
  return false;
}

/// Drops locals nobody else reads, repeatedly.
inline Program remove_dead_locals(Program p) {
  for (bool again = true; again;) {
    again = false;
    for (std::size_t k = 0; k < p.vars.size(); ++k) {
      const auto& v = p.vars[k];
      if (v.kind != VarKind::Local) continue;
      auto ei = p.equation_index(v.name);
      if (reads_anywhere(p, v.name, ei)) continue;
      if (ei) p.equations.erase(p.equations.begin() + static_cast<std::ptrdiff_t>(*ei));
      p.vars.erase(p.vars.begin() + static_cast<std::ptrdiff_t>(k));
      again = true;
      break;
    }
  }
  return p;
}

/// Rebuilds every read of `var` with `fn(read, names of the enclosing scope)`.
inline ExprPtr map_reads(const ExprPtr& e, const std::string& var, const std::vector<std::string>& names,
                         const std::function<ExprPtr(const VarRead&, const std::vector<std::string>&)>& fn) {
  if (auto v = e->as<VarRead>()) return v->name == var ? fn(*v, names) : e;
  if (e->as<Const>()) return e;
  if (auto b = e->as<Binary>())
    return make_binary(b->op, map_reads(b->lhs, var, names, fn), map_reads(b->rhs, var, names, fn));
  if (auto c = e->as<Case>()) {
    auto br = c->branches;
    for (auto& x : br) x.expr = map_reads(x.expr, var, names, fn);
    return make_case(std::move(br));
  }
  const auto& r = *e->as<Reduce>();
  return make_reduce(r.op, r.projection, r.body_domain, map_reads(r.body, var, r.body_domain.names(), fn));
}

/// Moves the reduction at `site` into a fresh local over its scope and reads
/// it back in place. Returns the program and the new equation's index.
inline std::pair<Program, std::size_t> hoist_reduction(const Program& p, const Site& site, const std::string& base) {
  if (site.path.empty()) return {p, site.equation};
  Scope s = scope_at(p, site);
  auto dom = remove_redundant(s.domain, kProgramMinSize);
  std::string name = fresh_name(base, taken_names(p));
  Program q = replace_at(p, site, make_read(name, AffineMap::identity(s.names.size())));
  add_local(q, name, scalar_of(p, p.equations[site.equation].var), dom, expr_at(p, site));
  q.provenance.push_back("hoist reduction of " + p.equations[site.equation].var + " into " + name);
  return {q, q.equations.size() - 1};
}

namespace detail {

struct GuardedExpr {
  std::optional<ParamPolyhedron> guard;  // nullopt: everywhere
  ExprPtr expr;
};

inline std::optional<ParamPolyhedron> meet(const std::optional<ParamPolyhedron>& a, const std::optional<ParamPolyhedron>& b) {
  if (!a) return b;
  if (!b) return a;
  return a->intersect(*b);
}

// Pulls case splits of a body expression (outside nested reductions) to the top.
inline std::vector<GuardedExpr> lift_cases(const ExprPtr& e, const std::vector<std::string>& names) {
  if (auto b = e->as<Binary>()) {
    auto ls = lift_cases(b->lhs, names), rs = lift_cases(b->rhs, names);
    if (ls.size() == 1 && rs.size() == 1 && !ls[0].guard && !rs[0].guard) return {{std::nullopt, e}};
    std::vector<GuardedExpr> out;
    for (const auto& l : ls)
      for (const auto& r : rs) {
        auto g = meet(l.guard, r.guard);
        if (g && is_empty(*g, kProgramMinSize)) continue;
        out.push_back({g, make_binary(b->op, l.expr, r.expr)});
      }
    return out;
  }
  if (auto c = e->as<Case>()) {
    std::vector<GuardedExpr> out;
    for (const auto& br : c->branches)
      for (auto& x : lift_cases(br.expr, names)) {
        auto g = meet(br.guard.renamed(names), x.guard);
        if (is_empty(*g, kProgramMinSize)) continue;
        out.push_back({g, x.expr});
      }
    return out;
  }
  return {{std::nullopt, e}};
}

}  // namespace detail

/// Splits every reduction whose body has a case split into one reduction per
/// branch, combined with the reduction operator.
inline Program normalize_case_bodies(const Program& p) {
  Program q = p;
  for (bool again = true; again;) {
    again = false;
    for (const auto& site : reduce_sites(q)) {
      const auto& r = *expr_at(q, site)->as<Reduce>();
      auto pieces = detail::lift_cases(r.body, r.body_domain.names());
      if (pieces.size() == 1 && !pieces[0].guard) continue;
      Scope s = scope_at(q, site);
      ExprPtr combined;
      for (const auto& piece : pieces) {
        auto dom = piece.guard ? r.body_domain.intersect(*piece.guard) : r.body_domain;
        if (is_empty(body_scope(s, Reduce{r.op, r.projection, dom, piece.expr}).domain, kProgramMinSize)) continue;
        auto red = make_reduce(r.op, r.projection, dom, piece.expr);
        combined = combined ? make_binary(r.op, combined, red) : red;
      }
      if (!combined) combined = identity_of(r.op);
      q = replace_at(q, site, combined);
      q.provenance.push_back("split case body of a reduction in " + q.equations[site.equation].var);
      again = true;
      break;
    }
  }
  return q;
}

namespace detail {

inline IntVector local_part(const IntVector& coeffs, const std::vector<std::size_t>& locals) {
  IntVector out;
  for (auto l : locals) out.push_back(coeffs[l]);
  return out;
}

inline bool all_zero(const IntVector& v) {
  return std::all_of(v.begin(), v.end(), [](Int x) { return x == 0; });
}

// Sign-normalized primitive direction, positive on its first nonzero entry.
inline IntVector oriented(const IntVector& v) {
  IntVector out = primitive(std::span<const Int>(v));
  for (Int x : out) {
    if (x == 0) continue;
    if (x < 0)
      for (auto& y : out) y = -y;
    break;
  }
  return out;
}

inline void collect_guard_rows(const ExprPtr& e, std::vector<IntVector>& reads, std::vector<IntVector>& guards) {
  if (auto v = e->as<VarRead>()) {
    for (const auto& row : v->access.rows) reads.push_back(row.coeffs);
  } else if (auto b = e->as<Binary>()) {
    collect_guard_rows(b->lhs, reads, guards);
    collect_guard_rows(b->rhs, reads, guards);
  } else if (auto c = e->as<Case>()) {
    for (const auto& br : c->branches) {
      for (const auto& g : br.guard.constraints()) guards.push_back(g.form.coeffs);
      collect_guard_rows(br.expr, reads, guards);
    }
  }
}

}  // namespace detail

/// Candidate new indices for decomposition: read-access rows (with their
/// answer parts), then body-constraint rows restricted to the locals;
/// deduplicated by local direction up to sign.
inline std::vector<AffineForm> propose_decompositions(const Reduce& r) {
  auto locals = local_indices(r);
  const std::size_t d = r.body_domain.dims();
  std::vector<IntVector> reads, guards;
  detail::collect_guard_rows(r.body, reads, guards);
  std::vector<IntVector> rows = reads;
  for (auto& g : guards) rows.push_back(g);
  for (const auto& c : r.body_domain.constraints()) {
    IntVector only(d, 0);
    for (auto l : locals) only[l] = c.form.coeffs[l];
    rows.push_back(only);
  }
  std::vector<AffineForm> out;
  std::set<IntVector> seen;
  for (const auto& row : rows) {
    auto lp = detail::local_part(row, locals);
    if (detail::all_zero(lp)) continue;
    auto key = detail::oriented(lp);
    if (!seen.insert(key).second) continue;
    IntVector full = row;
    bool flip = false;
    for (std::size_t k = 0; k < lp.size(); ++k) {
      if (lp[k] == 0) continue;
      flip = lp[k] < 0;
      break;
    }
    Int g = 0;
    for (Int x : full) g = gcd_abs(g, x);
    for (auto& x : full) x = (flip ? -x : x) / g;
    out.push_back(AffineForm(full, 0, 0));
  }
  return out;
}

/// Rewrites the reduction at `site` as an outer reduction over `new_index`
/// and an inner one, hoisted into a fresh local, over the remaining locals.
inline Program decompose(const Program& p, const Site& site, const AffineForm& new_index) {
  const auto& r = *expr_at(p, site)->as<Reduce>();
  auto coords = answer_coords(r);
  auto locals = local_indices(r);
  const auto& bnames = r.body_domain.names();
  if (new_index.dims() != bnames.size()) fail(ErrorCode::DimensionMismatch, "new index has the wrong number of coefficients");
  auto lp = detail::local_part(new_index.coeffs, locals);
  if (detail::all_zero(lp)) fail(ErrorCode::DependentIndex, "new index does not involve any reduction-local index");
  if (locals.size() < 2) fail(ErrorCode::Degenerate, "decomposition needs at least two accumulation indices");
  std::optional<std::size_t> elim;
  for (auto l : locals)
    if (new_index.coeffs[l] == 1 || new_index.coeffs[l] == -1) {
      elim = l;
      break;
    }
  if (!elim) fail(ErrorCode::DependentIndex, "new index has no unit coefficient on a local index");

  std::set<std::string> used(bnames.begin(), bnames.end());
  used.insert(p.param);
  std::string mname;
  std::size_t nonzero = 0;
  for (Int x : new_index.coeffs) nonzero += x != 0;
  if (nonzero == 1 && new_index.param == 0 && new_index.constant == 0) {
    mname = bnames[*elim];
  } else {
    for (const char* cand : {"m", "k", "l", "n", "r", "s", "t", "u", "v", "w"})
      if (!used.count(cand)) {
        mname = cand;
        break;
      }
    if (mname.empty()) mname = fresh_name("m", used);
  }

  // Inner space: [answers..., m, remaining locals...].
  std::vector<std::string> inner_names;
  for (auto c : coords) inner_names.push_back(bnames[c]);
  inner_names.push_back(mname);
  std::vector<std::size_t> rest;
  for (auto l : locals)
    if (l != *elim) {
      rest.push_back(l);
      inner_names.push_back(bnames[l]);
    }
  const std::size_t nd = inner_names.size(), na = coords.size();
  std::vector<AffineForm> subs(bnames.size(), AffineForm(nd));
  for (std::size_t k = 0; k < na; ++k) subs[coords[k]] = AffineForm::index(nd, k);
  for (std::size_t k = 0; k < rest.size(); ++k) subs[rest[k]] = AffineForm::index(nd, na + 1 + k);
  // m = c_e z_e + others  =>  z_e = c_e (m - others) for c_e = +-1.
  AffineForm others(nd);
  others.param = new_index.param;
  others.constant = new_index.constant;
  for (std::size_t i = 0; i < bnames.size(); ++i) {
    if (i == *elim || new_index.coeffs[i] == 0) continue;
    others = others + subs[i].scaled(new_index.coeffs[i]);
  }
  subs[*elim] = (AffineForm::index(nd, na) - others).scaled(new_index.coeffs[*elim]);

  Scope s = scope_at(p, site);
  auto inner_dom = substitute(r.body_domain, subs, inner_names);
  auto scoped = substitute(effective_body(s, r), subs, inner_names);
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k <= na; ++k) keep.push_back(k);
  auto z_dom = project(scoped, keep, kProgramMinSize);

  std::string zname = fresh_name("Z", taken_names(p));
  AffineMap inner_proj{nd, {}};
  for (std::size_t k = 0; k <= na; ++k) inner_proj.rows.push_back(AffineForm::index(nd, k));
  auto inner = make_reduce(r.op, inner_proj, inner_dom, substitute_indices(r.body, subs, inner_names));

  AffineMap outer_proj{na + 1, {}};
  for (std::size_t k = 0; k < na; ++k) outer_proj.rows.push_back(AffineForm::index(na + 1, k));
  auto outer = make_reduce(r.op, outer_proj, z_dom, make_read(zname, AffineMap::identity(na + 1)));

  Program q = replace_at(p, site, outer);
  add_local(q, zname, scalar_of(p, p.equations[site.equation].var), z_dom, inner);
  q.provenance.push_back("decompose reduction of " + p.equations[site.equation].var + " on " + mname + " = " +
                         format_affine(AffineForm(new_index.coeffs, new_index.param, new_index.constant), bnames, p.param));
  return q;
}

namespace detail {

// Terms of an associative-commutative chain of `op`.
inline void flatten_chain(const ExprPtr& e, Op op, std::vector<ExprPtr>& out) {
  auto b = e->as<Binary>();
  if (b && b->op == op) {
    flatten_chain(b->lhs, op, out);
    flatten_chain(b->rhs, op, out);
  } else {
    out.push_back(e);
  }
}

inline ExprPtr join_chain(const std::vector<ExprPtr>& terms, Op op) {
  ExprPtr out = terms.front();
  for (std::size_t k = 1; k < terms.size(); ++k) out = make_binary(op, out, terms[k]);
  return out;
}

// Whether nothing in `e` depends on the given body indices.
inline bool invariant_along(const ExprPtr& e, const std::vector<std::size_t>& locals) {
  if (auto v = e->as<VarRead>()) {
    for (const auto& row : v->access.rows)
      for (auto l : locals)
        if (row.coeffs[l] != 0) return false;
    return true;
  }
  if (e->as<Const>()) return true;
  if (auto b = e->as<Binary>()) return invariant_along(b->lhs, locals) && invariant_along(b->rhs, locals);
  if (auto c = e->as<Case>()) {
    for (const auto& br : c->branches) {
      for (const auto& g : br.guard.constraints())
        for (auto l : locals)
          if (g.form.coeffs[l] != 0) return false;
      if (!invariant_along(br.expr, locals)) return false;
    }
    return true;
  }
  return false;
}

}  // namespace detail

/// Pulls the body terms that do not vary along the accumulation out of the
/// reduction at `site`. A reduction defining a local has the factor pushed to
/// every read of that local instead.
inline Program factor_invariant(const Program& p, const Site& site, bool nonnegative_inputs = false) {
  const auto& r = *expr_at(p, site)->as<Reduce>();
  auto b = r.body->as<Binary>();
  if (!b || !distributes_over(b->op, r.op, nonnegative_inputs))
    fail(ErrorCode::NotDistributive, "body operator does not distribute over " + op_symbol(r.op));
  auto coords = answer_coords(r);
  auto locals = local_indices(r);
  std::vector<ExprPtr> terms, fixed, varying;
  if (b->op == Op::Add || b->op == Op::Mul) {
    detail::flatten_chain(r.body, b->op, terms);
  } else {
    terms = {b->lhs, b->rhs};
  }
  for (const auto& t : terms) (detail::invariant_along(t, locals) ? fixed : varying).push_back(t);
  if (fixed.empty() || varying.empty()) fail(ErrorCode::NotInvariant, "no body term is invariant along the accumulation");
  if (b->op != Op::Add && b->op != Op::Mul && varying.front() != b->rhs && varying.front() != b->lhs)
    fail(ErrorCode::NotInvariant, "no body term is invariant along the accumulation");
  const bool factor_left = b->op == Op::Add || b->op == Op::Mul || fixed.front() == b->lhs;

  Scope s = scope_at(p, site);
  const std::size_t od = s.names.size();
  std::vector<AffineForm> subs(r.body_domain.dims(), AffineForm(od));
  for (std::size_t k = 0; k < coords.size(); ++k) subs[coords[k]] = AffineForm::index(od, k);
  ExprPtr factor = substitute_indices(detail::join_chain(fixed, b->op), subs, s.names);
  auto rest = make_reduce(r.op, r.projection, r.body_domain, detail::join_chain(varying, b->op));
  auto combine = [&](ExprPtr f, ExprPtr x) { return factor_left ? make_binary(b->op, f, x) : make_binary(b->op, x, f); };

  const auto& eq = p.equations[site.equation];
  const VarDecl* var = p.find_var(eq.var);
  std::string what = print_expr(factor, s.names, p.param);
  if (site.path.empty() && var && var->kind == VarKind::Local) {
    Program q = replace_at(p, site, rest);
    for (std::size_t i = 0; i < q.equations.size(); ++i) {
      if (i == site.equation) continue;
      auto& e = q.equations[i];
      e.rhs = map_reads(e.rhs, eq.var, e.indices, [&](const VarRead& v, const std::vector<std::string>& names) {
        return combine(substitute_indices(factor, v.access.rows, names), make_read(v.name, v.access));
      });
    }
    q.provenance.push_back("factor " + what + " out of " + eq.var + " into its readers");
    return q;
  }
  Program q = replace_at(p, site, combine(factor, rest));
  q.provenance.push_back("factor " + what + " out of a reduction in " + eq.var);
  return q;
}

}  // namespace redsimpl
