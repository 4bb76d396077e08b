#pragma once

#include <string>
#include <vector>

#include "redsimpl/ir.hpp"
#include "redsimpl/lexer.hpp"

namespace redsimpl {

struct Diagnostic {
  std::string severity = "error";
  std::string code;
  std::string message;
  SourceSpan span;
  std::string subject;  // variable whose declaration or equation is at fault
};

/// Whether `pieces` jointly cover `ctx`, via recursive splitting on the
/// negations of each piece's constraints.
inline bool covers(const ParamPolyhedron& ctx, std::span<const ParamPolyhedron> pieces, Int min_size) {
  if (is_empty(ctx, min_size)) return true;
  if (pieces.empty()) return false;
  ParamPolyhedron acc = ctx;
  for (const auto& c : pieces[0].constraints()) {
    std::vector<Constraint> negs;
    negs.push_back(Constraint::ge((-c.form).shifted(-1)));
    if (c.is_eq()) negs.push_back(Constraint::ge(c.form.shifted(-1)));
    for (const auto& n : negs)
      if (!covers(acc.with(n), pieces.subspan(1), min_size)) return false;
    acc.add(c);
  }
  return true;
}

namespace detail {

struct Validator {
  const Program& p;
  std::vector<Diagnostic> out;

  std::string subject;

  void report(std::string code, std::string msg) {
    out.push_back(Diagnostic{"error", std::move(code), std::move(msg), {}, subject});
  }

  void check_read(const Scope& s, const VarRead& v, const std::string& where) {
    const VarDecl* d = p.find_var(v.name);
    if (!d) {
      report("UNDECLARED_VAR", where + " reads undeclared variable " + v.name);
      return;
    }
    if (v.access.out_dims() != d->domain.dims() || v.access.in_dims != s.names.size()) {
      report("ARITY_MISMATCH", where + " reads " + v.name + " with the wrong number of indices");
      return;
    }
    auto pre = preimage(d->domain, v.access, s.names);
    for (const auto& c : pre.constraints()) {
      if (!implies(s.domain, c, kProgramMinSize)) {
        report("READ_OUT_OF_DOMAIN", where + " reads " + v.name + " outside its domain " + d->domain.to_string());
        return;
      }
    }
  }

  void check(const Scope& s, const ExprPtr& e, const std::string& where) {
    if (is_empty(s.domain, kProgramMinSize)) return;
    if (auto v = e->as<VarRead>()) return check_read(s, *v, where);
    if (e->as<Const>()) return;
    if (auto b = e->as<Binary>()) {
      check(s, b->lhs, where);
      check(s, b->rhs, where);
      return;
    }
    if (auto c = e->as<Case>()) {
      std::vector<ParamPolyhedron> guards;
      for (const auto& br : c->branches) {
        if (br.guard.dims() != s.names.size()) {
          report("ARITY_MISMATCH", where + " has a case guard of the wrong arity");
          return;
        }
        guards.push_back(br.guard.renamed(s.names));
      }
      for (std::size_t i = 0; i < guards.size(); ++i)
        for (std::size_t j = i + 1; j < guards.size(); ++j)
          if (!is_empty(s.domain.intersect(guards[i]).intersect(guards[j]), kProgramMinSize))
            report("GUARD_OVERLAP", where + " has overlapping case branches " + std::to_string(i) + " and " + std::to_string(j));
      if (!covers(s.domain, guards, kProgramMinSize)) report("GUARD_COVERAGE", where + " has case branches that leave points uncovered");
      for (std::size_t i = 0; i < guards.size(); ++i) check(branch_scope(s, c->branches[i]), c->branches[i].expr, where);
      return;
    }
    const auto& r = *e->as<Reduce>();
    if (!is_reduction_op(r.op)) {
      report("BAD_OPERATOR", where + " reduces with non-associative operator " + op_symbol(r.op));
      return;
    }
    if (r.projection.in_dims != r.body_domain.dims() || r.projection.out_dims() != s.names.size()) {
      report("ARITY_MISMATCH", where + " has a projection of the wrong arity");
      return;
    }
    check(body_scope(s, r), r.body, where);
  }
};

}  // namespace detail

/// Structural and geometric well-formedness checks; an empty list means valid.
inline std::vector<Diagnostic> validate(const Program& p) {
  detail::Validator v{p, {}, {}};
  std::set<std::string> seen;
  for (const auto& d : p.vars) {
    v.subject = d.name;
    if (!seen.insert(d.name).second) v.report("DUPLICATE_VAR", "variable " + d.name + " declared twice");
  }
  std::map<std::string, int> defs;
  for (const auto& eq : p.equations) {
    v.subject = eq.var;
    const VarDecl* d = p.find_var(eq.var);
    if (!d) {
      v.report("UNDECLARED_VAR", "equation defines undeclared variable " + eq.var);
      continue;
    }
    if (d->kind == VarKind::Input) v.report("INPUT_DEFINED", "input " + eq.var + " has an equation");
    if (++defs[eq.var] > 1) v.report("DUPLICATE_EQUATION", "variable " + eq.var + " has more than one equation");
    if (eq.indices.size() != d->domain.dims()) {
      v.report("ARITY_MISMATCH", "equation for " + eq.var + " has the wrong number of indices");
      continue;
    }
    std::set<std::string> idx(eq.indices.begin(), eq.indices.end());
    if (idx.size() != eq.indices.size() || idx.count(p.param)) {
      v.report("BAD_INDEX_NAMES", "equation for " + eq.var + " repeats an index name");
      continue;
    }
    v.check(equation_scope(p, eq), eq.rhs, "equation for " + eq.var);
  }
  for (const auto& d : p.vars) {
    v.subject = d.name;
    if (d.kind != VarKind::Input && !defs.count(d.name)) v.report("MISSING_EQUATION", "variable " + d.name + " has no equation");
  }
  return v.out;
}

namespace detail {

// Merges a reduction whose body is a same-operator reduction into one
// reduction over the inner body space.
inline ExprPtr flatten_nested(const ExprPtr& e) {
  auto r = e->as<Reduce>();
  if (!r) return e;
  auto inner = r->body->as<Reduce>();
  if (!inner || inner->op != r->op) return e;
  ExprPtr in = flatten_nested(r->body);
  inner = in->as<Reduce>();
  const auto& names = inner->body_domain.names();
  auto dom = inner->body_domain.intersect(preimage(r->body_domain, inner->projection, names));
  return make_reduce(r->op, r->projection.compose(inner->projection), std::move(dom), inner->body);
}

inline ExprPtr inline_reads(const ExprPtr& e, const std::string& var, const Equation& def, const Scope& s, bool& changed) {
  if (auto v = e->as<VarRead>()) {
    if (v->name != var) return e;
    changed = true;
    return substitute_indices(def.rhs, v->access.rows, s.names);
  }
  if (e->as<Const>()) return e;
  if (auto b = e->as<Binary>())
    return make_binary(b->op, inline_reads(b->lhs, var, def, s, changed), inline_reads(b->rhs, var, def, s, changed));
  if (auto c = e->as<Case>()) {
    std::vector<CaseBranch> br;
    for (const auto& x : c->branches) br.push_back(CaseBranch{x.guard, inline_reads(x.expr, var, def, branch_scope(s, x), changed)});
    return make_case(std::move(br));
  }
  const auto& r = *e->as<Reduce>();
  return flatten_nested(make_reduce(r.op, r.projection, r.body_domain, inline_reads(r.body, var, def, body_scope(s, r), changed)));
}

inline bool reads_var(const ExprPtr& e, const std::string& var) {
  bool found = false;
  std::vector<std::size_t> path;
  walk(e, path, [&](const Expr& x, const std::vector<std::size_t>&) {
    if (auto v = x.as<VarRead>()) found |= v->name == var;
  });
  return found;
}

}  // namespace detail

/// Inlines the definition of `var` at its reads in the equation of `user`.
/// Same-operator reductions that become directly nested are merged.
inline Program substitute_definition(const Program& p, const std::string& user, const std::string& var) {
  auto ui = p.equation_index(user);
  if (!ui) fail(ErrorCode::InvalidProgram, "no equation for " + user);
  const Equation* def = p.find_equation(var);
  if (!def) fail(ErrorCode::InvalidProgram, "variable " + var + " has no defining equation");
  if (user == var || detail::reads_var(def->rhs, var))
    fail(ErrorCode::RecursiveDefinition, "definition of " + var + " is recursive");
  Program q = p;
  auto& eq = q.equations[*ui];
  bool changed = false;
  eq.rhs = detail::inline_reads(eq.rhs, var, *def, equation_scope(p, eq), changed);
  if (changed) q.provenance.push_back("substitute " + var + " into " + user);
  return q;
}

}  // namespace redsimpl
