#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "redsimpl/count.hpp"
#include "redsimpl/lattice.hpp"
#include "redsimpl/rewrite.hpp"

namespace redsimpl {

enum class Sign { Plus, Minus, Zero };

inline char sign_char(Sign s) { return s == Sign::Plus ? '+' : s == Sign::Minus ? '-' : '0'; }

/// A sign per facet of a face, and the reuse vectors that induce it.
struct Labeling {
  std::vector<IntVector> normals;  // one per facet
  std::vector<Sign> assignment;
  ParamPolyhedron reuse_set;
  std::optional<IntVector> chosen_rho;

  std::string signs() const {
    std::string s;
    for (auto a : assignment) s += sign_char(a);
    return s;
  }
};

namespace detail {

inline Constraint dot_constraint(const IntVector& nu, Int offset, bool eq) {
  AffineForm f(nu, 0, offset);
  return eq ? Constraint::eq(f) : Constraint::ge(f);
}

inline std::vector<IntVector> complement_rows(const std::vector<IntVector>& basis, std::size_t d) {
  if (basis.empty()) {
    std::vector<IntVector> out;
    for (std::size_t i = 0; i < d; ++i) {
      IntVector u(d, 0);
      u[i] = 1;
      out.push_back(u);
    }
    return out;
  }
  return null_space_basis(RatMatrix::from_rows(basis, d));
}

}  // namespace detail

/// Every sign assignment over the facets of `face` realized by some nonzero
/// vector of the reuse space lying in the face's affine hull.
inline std::vector<Labeling> enumerate_labelings(const Face& face, const ReuseSpace& reuse, const FaceLattice& lat) {
  if (reuse.dim() == 0) fail(ErrorCode::NoReuse, "reuse space is trivial");
  const auto& root = lat.root().geometry;
  const std::size_t d = root.dims();
  std::vector<IntVector> hull = detail::complement_rows(reuse.basis, d);
  for (auto s : face.saturation) hull.push_back(root.constraints()[s].form.coeffs);
  auto allowed = null_space_basis(RatMatrix::from_rows(hull, d));

  std::vector<IntVector> normals;
  for (const auto& f : lat.facets(face)) normals.push_back(lat.facet_normal(f, face));
  std::vector<std::size_t> free;
  for (std::size_t k = 0; k < normals.size(); ++k) {
    bool orth = std::all_of(allowed.begin(), allowed.end(), [&](const IntVector& b) { return dot(b, normals[k]) == 0; });
    if (!orth) free.push_back(k);
  }
  std::vector<Labeling> out;
  if (allowed.empty()) return out;
  std::size_t total = 1;
  for (std::size_t k = 0; k < free.size(); ++k) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    Labeling l;
    l.normals = normals;
    l.assignment.assign(normals.size(), Sign::Zero);
    std::size_t c = code;
    bool any = false;
    for (auto k : free) {
      l.assignment[k] = static_cast<Sign>(c % 3);
      any |= l.assignment[k] != Sign::Zero;
      c /= 3;
    }
    if (!any) continue;
    ParamPolyhedron set(root.names(), {}, root.param_name());
    for (const auto& h : hull) set.add(detail::dot_constraint(h, 0, true));
    for (std::size_t k = 0; k < normals.size(); ++k) {
      switch (l.assignment[k]) {
        case Sign::Plus: set.add(detail::dot_constraint(normals[k], -1, false)); break;
        case Sign::Minus: {
          IntVector neg = normals[k];
          for (auto& x : neg) x = -x;
          set.add(detail::dot_constraint(neg, -1, false));
          break;
        }
        case Sign::Zero: set.add(detail::dot_constraint(normals[k], 0, true)); break;
      }
    }
    if (is_empty(set, kProgramMinSize)) continue;
    l.reuse_set = std::move(set);
    out.push_back(std::move(l));
  }
  return out;
}

/// Smallest reuse vector of a labeling's class; also stored on the labeling.
inline IntVector select_rho(Labeling& l, std::optional<std::size_t> radius_cap = {}) {
  auto rho = smallest_point(l.reuse_set, radius_cap, kProgramMinSize);
  if (!rho) fail(ErrorCode::EmptyDomain, "labeling has an empty reuse set");
  l.chosen_rho = *rho;
  return *rho;
}

/// Labelings of the root face of the reduction at `site`.
inline std::vector<Labeling> site_labelings(const Program& p, const Site& site) {
  const auto& r = *expr_at(p, site)->as<Reduce>();
  auto body = effective_body(scope_at(p, site), r);
  auto reuse = reuse_space(r);
  if (reuse.dim() == 0) fail(ErrorCode::NoReuse, "reduction body has no reuse");
  auto lat = build_face_lattice(body);
  return enumerate_labelings(lat.root(), reuse, lat);
}

namespace detail {

// Body index substitution making the accumulation of `piece` a single point
// per answer, expressed over the answer names; nullopt when not unique.
inline std::optional<std::vector<AffineForm>> single_point(const ParamPolyhedron& piece, const std::vector<std::size_t>& coords,
                                                           std::size_t out_dims) {
  const std::size_t d = piece.dims();
  std::vector<std::size_t> locals;
  for (std::size_t i = 0; i < d; ++i)
    if (std::find(coords.begin(), coords.end(), i) == coords.end()) locals.push_back(i);
  auto tight = remove_redundant(piece, kProgramMinSize);
  // An independent set of equalities over the locals.
  std::vector<const Constraint*> eqs;
  std::vector<IntVector> picked;
  for (const auto& c : tight.constraints()) {
    if (!c.is_eq()) continue;
    IntVector row;
    for (auto l : locals) row.push_back(c.form.coeffs[l]);
    picked.push_back(row);
    if (rank(RatMatrix::from_rows(picked, locals.size())) < picked.size()) {
      picked.pop_back();
      continue;
    }
    eqs.push_back(&c);
  }
  RatMatrix m(eqs.size(), locals.size());
  for (std::size_t r = 0; r < eqs.size(); ++r)
    for (std::size_t k = 0; k < locals.size(); ++k) m.at(r, k) = eqs[r]->form.coeffs[locals[k]];
  if (rank(m) != locals.size()) return std::nullopt;
  // Columns of the right-hand side: each answer, then N, then the constant.
  std::vector<std::vector<Rational>> sol;
  for (std::size_t col = 0; col < out_dims + 2; ++col) {
    std::vector<Rational> rhs;
    for (const auto* c : eqs) {
      Int v = col < out_dims ? c->form.coeffs[coords[col]] : col == out_dims ? c->form.param : c->form.constant;
      rhs.push_back(Rational(-v));
    }
    auto x = solve_rational(m, rhs);
    if (!x) return std::nullopt;
    sol.push_back(*x);
  }
  std::vector<AffineForm> subs(d, AffineForm(out_dims));
  for (std::size_t k = 0; k < coords.size(); ++k) subs[coords[k]] = AffineForm::index(out_dims, k);
  for (std::size_t k = 0; k < locals.size(); ++k) {
    AffineForm f(out_dims);
    for (std::size_t col = 0; col < out_dims + 2; ++col) {
      const Rational& v = sol[col][k];
      if (v.get_den() != 1) return std::nullopt;
      Int iv = to_int(v.get_num());
      if (col < out_dims) f.coeffs[col] = iv;
      else if (col == out_dims) f.param = iv;
      else f.constant = iv;
    }
    subs[locals[k]] = f;
  }
  return subs;
}

// GE forms describing a domain, equalities split into two.
inline std::vector<AffineForm> ge_forms(const ParamPolyhedron& p) {
  std::vector<AffineForm> out;
  for (const auto& c : p.constraints()) {
    out.push_back(c.form);
    if (c.is_eq()) out.push_back(-c.form);
  }
  return out;
}

// Answer index k as body index coords[k].
inline std::vector<AffineForm> answer_to_body(const std::vector<std::size_t>& coords, std::size_t d) {
  std::vector<AffineForm> subs;
  for (auto c : coords) subs.push_back(AffineForm::index(d, c));
  return subs;
}

inline std::vector<AffineForm> lift_forms(const std::vector<AffineForm>& forms, const std::vector<std::size_t>& coords, std::size_t d) {
  auto subs = answer_to_body(coords, d);
  std::vector<AffineForm> out;
  for (const auto& f : forms) out.push_back(f.substitute(subs, d));
  return out;
}

}  // namespace detail

/// Rewrites the reduction at `site` as a recurrence along the labeling's
/// chosen reuse vector plus residual reductions over the boundary pieces.
inline Program single_step_simplify(const Program& p0, const Site& site0, const Labeling& l) {
  if (!l.chosen_rho) fail(ErrorCode::InvalidProgram, "labeling has no chosen reuse vector");
  const IntVector& rho = *l.chosen_rho;
  {
    const auto& r0 = *expr_at(p0, site0)->as<Reduce>();
    auto coords = answer_coords(r0);
    if (std::all_of(coords.begin(), coords.end(), [&](std::size_t c) { return rho.at(c) == 0; }))
      fail(ErrorCode::AccumulationReuse, "reuse vector " + format_vector(rho) + " lies in the accumulation space");
  }
  auto [p, ei] = hoist_reduction(p0, site0, p0.equations[site0.equation].var + "_red");
  const Equation eq = p.equations[ei];
  const std::string yname = eq.var;
  const auto& r = *eq.rhs->as<Reduce>();
  Scope s = equation_scope(p, eq);
  const ParamPolyhedron& dout = s.domain;
  const auto& names = s.names;
  const std::size_t od = names.size();
  const auto coords = answer_coords(r);
  const std::size_t d = r.body_domain.dims();
  auto body = effective_body(s, r);
  if (dimension(body) == 0) fail(ErrorCode::Degenerate, "reduction body is zero-dimensional");
  for (const auto& row : dependence_rows(r))
    if (dot(row, rho) != 0) fail(ErrorCode::InvalidProgram, "vector " + format_vector(rho) + " is not a reuse vector");

  IntVector shift;
  for (auto c : coords) shift.push_back(rho[c]);
  std::vector<AffineForm> dout_in_body = detail::lift_forms(detail::ge_forms(dout), coords, d);
  ParamPolyhedron demanded(r.body_domain.names(), {}, p.param);
  for (const auto& f : dout_in_body) demanded.add(Constraint::ge(f));

  // Boundary pieces: points entering (PLUS) and leaving (MINUS) the body
  // when it is shifted along rho.
  std::vector<ParamPolyhedron> plus, minus;
  std::vector<std::pair<AffineForm, Int>> ges;
  for (const auto& c : body.constraints()) {
    Int sv = dot(c.form.coeffs, rho);
    if (c.is_eq()) {
      if (sv != 0) fail(ErrorCode::InvalidProgram, "reuse vector leaves the body's affine hull");
      continue;
    }
    ges.emplace_back(c.form, sv);
  }
  {
    ParamPolyhedron prev = body;
    for (const auto& [f, sv] : ges) {
      if (sv <= 0) continue;
      auto piece = prev.with(Constraint::ge((-f).shifted(sv - 1)));
      if (!is_empty(piece, kProgramMinSize)) plus.push_back(remove_redundant(piece, kProgramMinSize));
      prev.add(Constraint::ge(f.shifted(-sv)));
    }
  }
  {
    ParamPolyhedron prev = translate(body, rho).intersect(demanded);
    for (const auto& [f, sv] : ges) {
      if (sv >= 0) continue;
      auto piece = prev.with(Constraint::ge((-f).shifted(-1)));
      if (!is_empty(piece, kProgramMinSize)) minus.push_back(remove_redundant(piece, kProgramMinSize));
      prev.add(Constraint::ge(f));
    }
  }
  auto inv = inverse_of(r.op);
  if (!minus.empty() && !inv)
    fail(ErrorCode::NeedsInverse, "labeling " + l.signs() + " needs the inverse of " + op_symbol(r.op));

  // Answer-space guards: the recurrence where the shifted answer exists,
  // base cases elsewhere.
  ParamPolyhedron shifted_dom = translate(dout, shift);
  std::vector<ParamPolyhedron> bases;
  {
    ParamPolyhedron prev = dout;
    for (const auto& g : detail::ge_forms(dout)) {
      Int sv = dot(g.coeffs, shift);
      if (sv <= 0) continue;
      auto piece = prev.with(Constraint::ge((-g).shifted(sv - 1)));
      if (!is_empty(piece, kProgramMinSize)) bases.push_back(remove_redundant(piece, kProgramMinSize));
      prev.add(Constraint::ge(g.shifted(-sv)));
    }
  }
  auto rec_guard = remove_redundant(dout.intersect(shifted_dom), kProgramMinSize);
  bool has_rec = !is_empty(rec_guard, kProgramMinSize);

  const auto to_body = detail::answer_to_body(coords, d);
  std::vector<ParamPolyhedron> pieces = plus;
  pieces.insert(pieces.end(), minus.begin(), minus.end());
  // A piece under a guard contributes nothing, a single inlined body value,
  // or a read of a hoisted residual reduction (returned as nullptr).
  struct Term {
    bool present = false;
    ExprPtr inlined;
  };
  auto classify = [&](std::size_t id, const ParamPolyhedron& guard) -> Term {
    const auto& piece = pieces[id];
    auto lifted = piece.intersect(substitute(guard, to_body, piece.names()));
    if (is_empty(lifted, kProgramMinSize)) return {};
    if (auto subs = detail::single_point(lifted, coords, od)) {
      if (subset_of(guard, substitute(piece, *subs, names), kProgramMinSize))
        return {true, substitute_indices(r.body, *subs, names)};
    }
    return {true, nullptr};
  };

  struct Slot {
    ParamPolyhedron guard;
    std::vector<std::pair<std::size_t, Term>> terms;
  };
  std::vector<Slot> slots;
  for (const auto& g : bases) {
    Slot sl{g, {}};
    for (std::size_t k = 0; k < plus.size(); ++k) sl.terms.emplace_back(k, classify(k, g));
    slots.push_back(std::move(sl));
  }
  if (has_rec) {
    Slot sl{rec_guard, {}};
    for (std::size_t k = 0; k < pieces.size(); ++k) sl.terms.emplace_back(k, classify(k, rec_guard));
    slots.push_back(std::move(sl));
  }

  // Residuals read under one guard only are stored over that guard.
  Program q = p;
  std::map<std::size_t, std::vector<std::size_t>> readers;
  for (std::size_t si = 0; si < slots.size(); ++si)
    for (const auto& [id, t] : slots[si].terms)
      if (t.present && !t.inlined) readers[id].push_back(si);
  std::map<std::size_t, std::string> hoisted;
  for (const auto& [id, at] : readers) {
    std::string nm = fresh_name(yname + (id < plus.size() ? "_plus" : "_minus"), taken_names(q));
    const auto& dom = at.size() == 1 ? slots[at.front()].guard : dout;
    add_local(q, nm, scalar_of(p, yname), dom.renamed(names), make_reduce(r.op, r.projection, pieces[id], r.body));
    hoisted[id] = nm;
  }

  std::vector<CaseBranch> branches;
  for (std::size_t si = 0; si < slots.size(); ++si) {
    const bool rec = has_rec && si + 1 == slots.size();
    ExprPtr e;
    if (rec) {
      AffineMap back = AffineMap::identity(od);
      for (std::size_t k = 0; k < od; ++k) back.rows[k] = back.rows[k].shifted(-shift[k]);
      e = make_read(yname, back);
    }
    for (const auto& [id, t] : slots[si].terms) {
      if (!t.present) continue;
      ExprPtr term = t.inlined ? t.inlined : make_read(hoisted.at(id), AffineMap::identity(od));
      Op op = id < plus.size() ? r.op : *inv;
      e = e ? make_binary(op, e, term) : term;
    }
    branches.push_back(CaseBranch{slots[si].guard, e ? e : identity_of(r.op)});
  }
  ExprPtr rhs = branches.size() == 1 ? branches[0].expr : make_case(std::move(branches));
  q.equations[ei].rhs = rhs;
  q.provenance.push_back("simplify " + yname + " along " + format_vector(rho) + " labeling " + l.signs());
  return remove_dead_locals(q);
}

struct TraceStep {
  std::string kind;    // hoist, simplify, decompose or factor
  std::string target;  // variable whose equation holds the reduction
  std::string detail;  // reuse vector, labeling or new index
};

struct Variant {
  Program program;
  std::vector<TraceStep> trace;
  QuasiPolynomial complexity;
  std::size_t degree() const { return complexity.degree(); }
};

struct SearchOptions {
  std::size_t max_nodes = 20000;
  double max_seconds = 300;
  bool first_only = false;
  bool nonnegative_inputs = false;
};

struct SearchResult {
  std::vector<Variant> variants;  // minimum-degree leaves, if better than the input
  std::vector<Variant> leaves;    // one per derivation
  std::size_t distinct_programs = 0;  // distinct texts among the variants
  QuasiPolynomial original;
  std::size_t nodes = 0;
  bool budget_exceeded = false;
};

/// A transformation applicable at one reduction.
struct Move {
  TraceStep step;
  Program result;
};

namespace detail {

// Single steps over every admissible labeling of the reduction at `site`.
// `blocked_by_inverse` reports whether some labeling needed a missing inverse.
inline std::vector<Move> single_steps(const Program& p, const Site& site, bool* blocked_by_inverse = nullptr) {
  std::vector<Move> out;
  const auto& r = *expr_at(p, site)->as<Reduce>();
  if (reuse_space(r).dim() == 0) return out;
  auto body = effective_body(scope_at(p, site), r);
  auto lat = build_face_lattice(body);
  const std::string target = p.equations[site.equation].var;
  for (auto& l : enumerate_labelings(lat.root(), reuse_space(r), lat)) {
    try {
      auto rho = select_rho(l);
      auto q = single_step_simplify(p, site, l);
      out.push_back({{"simplify", target, format_vector(rho) + " " + l.signs()}, std::move(q)});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NeedsInverse && blocked_by_inverse) *blocked_by_inverse = true;
      if (e.code() != ErrorCode::NeedsInverse && e.code() != ErrorCode::AccumulationReuse &&
          e.code() != ErrorCode::RadiusExhausted)
        throw;
    }
  }
  return out;
}

inline std::string between(const std::string& s, const std::string& from, const std::string& to) {
  auto a = s.find(from);
  if (a == std::string::npos) return s;
  a += from.size();
  auto b = to.empty() ? std::string::npos : s.find(to, a);
  return s.substr(a, b == std::string::npos ? std::string::npos : b - a);
}

// Site of the reduction left behind by factoring at `site`.
inline Site factored_site(const Program& q, const Site& site) {
  if (expr_at(q, site)->as<Reduce>()) return site;
  Site s = site;
  const auto& b = *expr_at(q, site)->as<Binary>();
  s.path.push_back(b.lhs->as<Reduce>() ? 0 : 1);
  return s;
}

inline std::optional<Program> try_factor(const Program& p, const Site& site, bool nonneg) {
  try {
    return factor_invariant(p, site, nonneg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotDistributive && e.code() != ErrorCode::NotInvariant) throw;
  }
  return std::nullopt;
}

// Whether the reduction at `site` admits a single step, possibly after
// factoring out its invariant terms.
inline bool exposes_reuse(const Program& q, const Site& site, bool nonneg, bool allow_factor) {
  if (!single_steps(q, site).empty()) return true;
  if (!allow_factor) return false;
  auto f = try_factor(q, site, nonneg);
  return f && !single_steps(*f, factored_site(*f, site)).empty();
}

}  // namespace detail

/// Every transformation that applies to the reduction at `site`: single steps
/// over admissible labelings, or, when there are none, factoring and
/// decompositions that expose reuse.
inline std::vector<Move> moves_at(const Program& p, const Site& site, const SearchOptions& opt = {}) {
  const auto& r = *expr_at(p, site)->as<Reduce>();
  if (!r.projection.coordinate_indices()) return {};
  Scope s = scope_at(p, site);
  auto body = effective_body(s, r);
  if (is_empty(body, kDefaultMinSize)) return {};
  if (fiber_dimension(body, answer_coords(r)) == 0) return {};
  bool blocked = false;
  auto out = detail::single_steps(p, site, &blocked);
  if (!out.empty()) return out;
  // Reuse that only runs along the accumulation is not something a change of
  // basis can turn into a recurrence.
  if (reuse_space(r).dim() > 0 && !blocked) return out;

  const std::string target = p.equations[site.equation].var;
  if (auto q = detail::try_factor(p, site, opt.nonnegative_inputs)) {
    if (detail::exposes_reuse(*q, detail::factored_site(*q, site), opt.nonnegative_inputs, false))
      out.push_back({{"factor", target, detail::between(q->provenance.back(), "factor ", " out of")}, remove_dead_locals(*q)});
  }
  if (local_indices(r).size() >= 2) {
    for (const auto& idx : propose_decompositions(r)) {
      try {
        auto q = decompose(p, site, idx);
        Site inner{q.equations.size() - 1, {}};
        if (detail::exposes_reuse(q, inner, opt.nonnegative_inputs, true))
          out.push_back({{"decompose", target, detail::between(q.provenance.back(), " on ", "")}, std::move(q)});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DependentIndex) throw;
      }
    }
  }
  return out;
}

namespace detail {

class Search {
 public:
  Search(const SearchOptions& opt) : opt_(opt), start_(std::chrono::steady_clock::now()) {}

  void run(const Program& p, std::vector<TraceStep>& trace) {
    if (stop_) return;
    if (++nodes_ > opt_.max_nodes || elapsed() > opt_.max_seconds) {
      exceeded_ = stop_ = true;
      return;
    }
    for (const auto& site : reduce_sites(p)) {
      auto moves = moves_at(p, site, opt_);
      if (moves.empty()) continue;
      for (auto& m : moves) {
        trace.push_back(m.step);
        run(m.result, trace);
        trace.pop_back();
        if (stop_) return;
      }
      return;
    }
    leaves_.push_back(Variant{p, trace, {}});
    if (opt_.first_only) stop_ = true;
  }

  std::vector<Variant> leaves_;
  std::size_t nodes_ = 0;
  bool exceeded_ = false;

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  SearchOptions opt_;
  std::chrono::steady_clock::time_point start_;
  bool stop_ = false;
};

}  // namespace detail

/// Exhaustive search over simplification, decomposition and factoring.
/// Returns the distinct leaves of lowest operation-count degree when that
/// degree beats the input program's.
inline SearchResult simplify_all(const Program& p, const SearchOptions& opt = {}) {
  SearchResult res;
  res.original = program_ops(p).total;
  Program start = normalize_case_bodies(p);
  std::vector<TraceStep> trace;
  if (start.provenance.size() != p.provenance.size()) trace.push_back({"normalize", "", "split case bodies"});
  detail::Search search(opt);
  search.run(start, trace);
  res.nodes = search.nodes_;
  res.budget_exceeded = search.exceeded_;
  std::size_t best = res.original.degree();
  for (auto& leaf : search.leaves_) {
    leaf.complexity = program_ops(leaf.program).total;
    best = std::min(best, leaf.degree());
  }
  res.leaves = search.leaves_;
  std::set<std::string> texts;
  for (const auto& leaf : res.leaves) {
    if (leaf.degree() != best || best >= res.original.degree()) continue;
    res.variants.push_back(leaf);
    texts.insert(canonical_text(leaf.program));
  }
  res.distinct_programs = texts.size();
  return res;
}

}  // namespace redsimpl
