#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "redsimpl/exec.hpp"
#include "redsimpl/ir.hpp"

namespace redsimpl {

/// A self-contained C99 translation unit.
struct CUnit {
  std::string source;
  std::string entry;
  std::map<std::string, std::string> accessors;  // variable -> function reading it
};

namespace detail {

inline std::string linear_text(const std::vector<std::pair<Int, std::string>>& terms, Int constant) {
  std::string s;
  for (const auto& [a, name] : terms) {
    if (a == 0) continue;
    Int mag = a < 0 ? -a : a;
    if (s.empty())
      s += a < 0 ? "-" : "";
    else
      s += a < 0 ? " - " : " + ";
    if (mag != 1) s += std::to_string(mag) + "*";
    s += name;
  }
  if (constant != 0 || s.empty()) {
    Int mag = constant < 0 ? -constant : constant;
    if (s.empty())
      s = std::to_string(constant);
    else
      s += (constant < 0 ? " - " : " + ") + std::to_string(mag);
  }
  return s;
}

// True when s has no operator outside brackets.
inline bool is_atom(const std::string& s) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char ch = s[i];
    if (ch == '(' || ch == '[') ++depth;
    if (ch == ')' || ch == ']') --depth;
    if (depth == 0 && (ch == ' ' || (i > 0 && (ch == '-' || ch == '+')))) return false;
  }
  return true;
}

inline std::string paren(const std::string& s) { return is_atom(s) ? s : "(" + s + ")"; }

inline std::string affine_text(const AffineForm& f, const std::vector<std::string>& names) {
  std::vector<std::pair<Int, std::string>> terms;
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) terms.emplace_back(f.coeffs[i], names[i]);
  terms.emplace_back(f.param, "N");
  return linear_text(terms, f.constant);
}

inline std::string row_text(const fm::Row& r, const std::vector<std::string>& names, std::size_t skip) {
  std::vector<std::pair<Int, std::string>> terms;
  for (std::size_t i = 0; i < r.a.size(); ++i)
    if (i != skip) terms.emplace_back(r.a[i], names[i]);
  return linear_text(terms, r.c);
}

inline std::string condition_text(const fm::Row& r, const std::vector<std::string>& names) {
  return row_text(r, names, r.a.size()) + (r.eq ? " == 0" : " >= 0");
}

class CEmitter {
 public:
  explicit CEmitter(const Program& p) : p_(p) {
    if (p.scalar() == ScalarKind::Rational) fail(ErrorCode::UnsupportedScalar, "rational programs have no C scalar type");
    floats_ = p.scalar() == ScalarKind::Float;
    t_ = floats_ ? "double" : "long long";
    for (const auto& v : p.vars) reserved_.insert({v.name + "_val", v.name + "_set", "get_" + v.name});
  }

  CUnit run() {
    CUnit u;
    std::ostringstream o;
    prelude(o);
    for (const auto& v : p_.vars) storage(o, v);
    o << "\n";
    for (const auto& v : p_.vars) {
      if (v.kind == VarKind::Input) continue;
      o << "static scalar get_" << v.name << "(" << index_params(v.domain.dims()) << ");\n";
    }
    for (const auto& v : p_.vars) u.accessors[v.name] = "get_" + v.name;
    for (const auto& v : p_.vars) accessor(o, v);
    harness(o);
    u.source = o.str();
    std::string ins, outs;
    for (const auto& v : p_.vars) {
      auto& dst = v.kind == VarKind::Input ? ins : v.kind == VarKind::Output ? outs : ins;
      if (v.kind == VarKind::Local) continue;
      dst += (dst.empty() ? "" : ", ") + v.name;
    }
    u.entry = "int main(int argc, char **argv): N from argv[1] or stdin, then inputs " + (ins.empty() ? "(none)" : ins) +
              " from stdin; prints " + outs + ", one line each";
    return u;
  }

 private:
  static std::string index_params(std::size_t d) {
    std::string s;
    for (std::size_t i = 0; i < d; ++i) s += (i ? ", " : "") + std::string("long long x") + std::to_string(i);
    return d ? s : "void";
  }

  void prelude(std::ostringstream& o) const {
    o << "#include <limits.h>\n#include <math.h>\n#include <stdio.h>\n#include <stdlib.h>\n\n";
    o << "typedef " << t_ << " scalar;\n";
    if (floats_)
      o << "#define RS_INF HUGE_VAL\n";
    else
      o << "#define RS_INF LLONG_MAX\n";
    o << "\nstatic long long N;\n\n";
    o << "static inline long long rs_cdiv(long long a, long long b) { long long q = a / b; return (a % b != 0 && ((a < 0) == (b < 0))) ? q + 1 : q; }\n";
    o << "static inline long long rs_fdiv(long long a, long long b) { long long q = a / b; return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q; }\n";
    o << "static inline long long rs_imax(long long a, long long b) { return a > b ? a : b; }\n";
    o << "static inline long long rs_imin(long long a, long long b) { return a < b ? a : b; }\n";
    o << "static inline scalar rs_max(scalar a, scalar b) { return a > b ? a : b; }\n";
    o << "static inline scalar rs_min(scalar a, scalar b) { return a < b ? a : b; }\n";
    o << "static void rs_hole(const char *what) { fprintf(stderr, \"no value for %s\\n\", what); exit(1); }\n\n";
  }

  void storage(std::ostringstream& o, const VarDecl& v) const {
    const std::size_t d = v.domain.dims();
    o << "static scalar *" << v.name << "_val;\n";
    if (v.kind != VarKind::Input) o << "static unsigned char *" << v.name << "_set;\n";
    if (d) o << "static long long " << v.name << "_lo[" << d << "], " << v.name << "_ext[" << d << "];\n";
    o << "static long long " << v.name << "_at(" << index_params(d) << ") {\n  long long at = 0;\n";
    for (std::size_t i = 0; i < d; ++i)
      o << "  at = at * " << v.name << "_ext[" << i << "] + (x" << i << " - " << v.name << "_lo[" << i << "]);\n";
    o << "  return at;\n}\n";
  }

  // Loop nest over a scanner; `emit_body` writes the innermost statements.
  template <class F>
  void scan(std::ostringstream& o, const Scanner& sc, std::vector<std::string> names, std::size_t params, int ind,
            F&& emit_body) {
    std::string pad(static_cast<std::size_t>(ind), ' ');
    if (sc.trivially_empty()) return;
    std::string guard;
    for (const auto& g : sc.guards()) guard += (guard.empty() ? "" : " && ") + condition_text(g, names);
    int depth = ind;
    if (!guard.empty()) {
      o << pad << "if (" << guard << ") {\n";
      depth += 2;
    }
    for (std::size_t k = 0; k < sc.loops(); ++k) {
      const std::size_t v = params + k;
      const auto& lvl = sc.levels()[k];
      std::string lo, hi;
      for (auto r : lvl.lower) {
        Int a = r.a[v];
        if (a < 0) {
          for (auto& x : r.a) x = -x;
          r.c = -r.c;
          a = -a;
        }
        for (auto& x : r.a) x = -x;
        r.c = -r.c;
        std::string num = row_text(r, names, v);
        std::string b = a == 1 ? num : "rs_cdiv(" + num + ", " + std::to_string(a) + ")";
        lo = lo.empty() ? b : "rs_imax(" + lo + ", " + b + ")";
      }
      for (auto r : lvl.upper) {
        Int a = r.a[v];
        if (a > 0) {
          for (auto& x : r.a) x = -x;
          r.c = -r.c;
          a = -a;
        }
        std::string num = row_text(r, names, v);
        std::string b = a == -1 ? num : "rs_fdiv(" + num + ", " + std::to_string(-a) + ")";
        hi = hi.empty() ? b : "rs_imin(" + hi + ", " + b + ")";
      }
      std::string p2(static_cast<std::size_t>(depth), ' ');
      const auto& x = names[v];
      o << p2 << "for (long long " << x << " = " << lo << "; " << x << " <= " << hi << "; ++" << x << ") {\n";
      depth += 2;
    }
    emit_body(depth);
    for (std::size_t k = 0; k < sc.loops(); ++k) {
      depth -= 2;
      o << std::string(static_cast<std::size_t>(depth), ' ') << "}\n";
    }
    if (!guard.empty()) o << pad << "}\n";
  }

  std::string fresh_index(const std::string& base, const std::vector<std::string>& live) {
    std::string s = base;
    for (int k = 1; std::find(live.begin(), live.end(), s) != live.end() || reserved_.count(s) || s == "N"; ++k)
      s = base + "_" + std::to_string(k);
    return s;
  }

  std::string fresh_temp(const char* base) { return std::string(base) + "_" + std::to_string(++temps_); }

  std::string literal(const Const& c) const {
    if (c.infinity) return c.infinity > 0 ? "RS_INF" : "(-RS_INF)";
    if (!floats_) return c.value.get_str();
    if (c.value.get_den() == 1) return c.value.get_num().get_str() + ".0";
    return "(" + c.value.get_num().get_str() + ".0 / " + c.value.get_den().get_str() + ".0)";
  }

  static bool pure(const ExprPtr& e) {
    if (e->as<Case>() || e->as<Reduce>()) return false;
    if (auto b = e->as<Binary>()) return pure(b->lhs) && pure(b->rhs);
    return true;
  }

  std::string read_text(const VarRead& v, const std::vector<std::string>& names) const {
    std::string args;
    for (std::size_t i = 0; i < v.access.rows.size(); ++i) args += (i ? ", " : "") + affine_text(v.access.rows[i], names);
    const VarDecl* d = p_.find_var(v.name);
    if (d->kind == VarKind::Input) return v.name + "_val[" + v.name + "_at(" + args + ")]";
    return "get_" + v.name + "(" + args + ")";
  }

  std::string pure_text(const ExprPtr& e, const std::vector<std::string>& names) const {
    if (auto v = e->as<VarRead>()) return read_text(*v, names);
    if (auto c = e->as<Const>()) return literal(*c);
    const auto& b = *e->as<Binary>();
    std::string l = pure_text(b.lhs, names), r = pure_text(b.rhs, names);
    return combine(b.op, l, r);
  }

  static std::string combine(Op op, const std::string& l, const std::string& r) {
    if (op == Op::Min) return "rs_min(" + l + ", " + r + ")";
    if (op == Op::Max) return "rs_max(" + l + ", " + r + ")";
    return paren(l) + " " + op_symbol(op) + " " + paren(r);
  }

  // Writes statements leaving the value of e in `target`.
  void assign(std::ostringstream& o, const ExprPtr& e, const Scope& s, const std::vector<std::string>& names,
              const std::string& target, int ind) {
    std::string pad(static_cast<std::size_t>(ind), ' ');
    if (pure(e)) {
      o << pad << target << " = " << pure_text(e, names) << ";\n";
      return;
    }
    if (auto b = e->as<Binary>()) {
      auto operand = [&](const ExprPtr& x) {
        if (pure(x)) return pure_text(x, names);
        std::string t = fresh_temp("tmp");
        o << pad << "scalar " << t << ";\n";
        assign(o, x, s, names, t, ind);
        return t;
      };
      std::string l = operand(b->lhs);
      std::string r = operand(b->rhs);
      o << pad << target << " = " << combine(b->op, l, r) << ";\n";
      return;
    }
    if (auto c = e->as<Case>()) {
      for (std::size_t i = 0; i < c->branches.size(); ++i) {
        const auto& br = c->branches[i];
        std::string cond;
        for (const auto& con : br.guard.constraints()) {
          auto& f = con.form;
          cond += (cond.empty() ? "" : " && ") + affine_text(f, names) + (con.is_eq() ? " == 0" : " >= 0");
        }
        if (cond.empty()) cond = "1";
        o << pad << (i ? "} else if (" : "if (") << cond << ") {\n";
        assign(o, br.expr, branch_scope(s, br), names, target, ind + 2);
      }
      o << pad << "} else {\n" << pad << "  rs_hole(\"case\");\n" << pad << "}\n";
      return;
    }
    const auto& r = *e->as<Reduce>();
    Scope inner = body_scope(s, r);
    std::vector<std::string> fiber_names = {"N"};
    fiber_names.insert(fiber_names.end(), names.begin(), names.end());
    // Body coordinates that equal an answer coordinate reuse its name.
    const std::size_t k = names.size(), d = r.body_domain.dims();
    std::vector<std::optional<std::size_t>> pinned(d);
    for (std::size_t j = 0; j < k; ++j) {
      const auto& f = r.projection.rows[j];
      if (f.param != 0 || f.constant != 0) continue;
      std::optional<std::size_t> only;
      bool unit = true;
      for (std::size_t b = 0; b < d; ++b) {
        if (f.coeffs[b] == 0) continue;
        if (f.coeffs[b] != 1 || only) unit = false;
        only = b;
      }
      if (unit && only && !pinned[*only]) pinned[*only] = j;
    }
    std::vector<std::string> body_names;
    std::vector<std::size_t> free;
    for (std::size_t b = 0; b < d; ++b) {
      if (pinned[b]) {
        body_names.push_back(names[*pinned[b]]);
        continue;
      }
      std::vector<std::string> live = fiber_names;
      live.insert(live.end(), body_names.begin(), body_names.end());
      body_names.push_back(fresh_index(r.body_domain.names()[b], live));
      free.push_back(b);
    }
    fm::System full = fiber_system(r);
    fm::System sys(1 + k + free.size());
    for (auto row : full.rows()) {
      for (std::size_t b = 0; b < d; ++b)
        if (pinned[b]) row.a[1 + *pinned[b]] += row.a[1 + k + b];
      fm::Row x;
      x.a.assign(row.a.begin(), row.a.begin() + static_cast<std::ptrdiff_t>(1 + k));
      for (auto b : free) x.a.push_back(row.a[1 + k + b]);
      x.c = row.c;
      x.eq = row.eq;
      sys.add(std::move(x));
    }
    if (full.infeasible()) sys.add(fm::Row{IntVector(1 + k + free.size(), 0), -1, false});
    for (auto b : free) fiber_names.push_back(body_names[b]);
    std::string acc = fresh_temp("acc");
    o << pad << "scalar " << acc << " = " << literal(*identity_of(r.op)->as<Const>()) << ";\n";
    Scanner sc(std::move(sys), 1 + k);
    scan(o, sc, fiber_names, 1 + names.size(), ind, [&](int depth) {
      std::string p2(static_cast<std::size_t>(depth), ' ');
      if (pure(r.body)) {
        o << p2 << acc << " = " << combine(r.op, acc, pure_text(r.body, body_names)) << ";\n";
      } else {
        std::string t = fresh_temp("tmp");
        o << p2 << "scalar " << t << ";\n";
        assign(o, r.body, inner, body_names, t, depth);
        o << p2 << acc << " = " << combine(r.op, acc, t) << ";\n";
      }
    });
    o << pad << target << " = " << acc << ";\n";
  }

  void accessor(std::ostringstream& o, const VarDecl& v) {
    if (v.kind == VarKind::Input) return;
    const Equation* eq = p_.find_equation(v.name);
    if (!eq) fail(ErrorCode::InvalidProgram, "variable " + v.name + " has no equation");
    std::vector<std::string> names;
    for (const auto& nm : eq->indices) names.push_back(fresh_index(nm, names));
    std::string params;
    for (std::size_t i = 0; i < names.size(); ++i) params += (i ? ", " : "") + std::string("long long ") + names[i];
    std::string args;
    for (std::size_t i = 0; i < names.size(); ++i) args += (i ? ", " : "") + names[i];
    o << "\nstatic scalar get_" << v.name << "(" << (params.empty() ? "void" : params) << ") {\n";
    o << "  long long at = " << v.name << "_at(" << args << ");\n";
    o << "  if (" << v.name << "_set[at]) return " << v.name << "_val[at];\n";
    o << "  scalar v;\n";
    temps_ = 0;
    assign(o, eq->rhs, equation_scope(p_, *eq), names, "v", 2);
    o << "  " << v.name << "_val[at] = v;\n  " << v.name << "_set[at] = 1;\n  return v;\n}\n";
  }

  std::vector<std::string> domain_names(const VarDecl& v) {
    std::vector<std::string> names = {"N"};
    for (const auto& nm : v.domain.names()) names.push_back(fresh_index(nm, names));
    return names;
  }

  void harness(std::ostringstream& o) {
    const char* fmt = floats_ ? "%lf" : "%lld";
    o << "\nstatic void put(scalar x) {\n";
    o << "  if (x == RS_INF) printf(\"inf\");\n  else if (x == -RS_INF) printf(\"-inf\");\n";
    o << (floats_ ? "  else printf(\"%.17g\", x);\n" : "  else printf(\"%lld\", x);\n") << "}\n";
    o << "\nstatic scalar get(void) {\n  char buf[64];\n  scalar x;\n";
    o << "  if (scanf(\"%63s\", buf) != 1) rs_hole(\"input value\");\n";
    o << "  if (buf[0] == 'i' || (buf[0] == '+' && buf[1] == 'i')) return RS_INF;\n";
    o << "  if (buf[0] == '-' && buf[1] == 'i') return -RS_INF;\n";
    o << "  if (sscanf(buf, \"" << fmt << "\", &x) != 1) rs_hole(\"input value\");\n  return x;\n}\n";
    o << "\nint main(int argc, char **argv) {\n";
    o << "  if (argc > 1) N = atoll(argv[1]);\n";
    o << "  else if (scanf(\"%lld\", &N) != 1) rs_hole(\"N\");\n";
    for (const auto& v : p_.vars) {
      const std::size_t d = v.domain.dims();
      Scanner sc(v.domain.system(std::nullopt, true), 1);
      auto names = domain_names(v);
      o << "  {\n    long long count = 0;\n";
      for (std::size_t i = 0; i < d; ++i)
        o << "    long long lo" << i << " = LLONG_MAX, hi" << i << " = LLONG_MIN;\n";
      scan(o, sc, names, 1, 4, [&](int depth) {
        std::string p2(static_cast<std::size_t>(depth), ' ');
        o << p2 << "++count;\n";
        for (std::size_t i = 0; i < d; ++i)
          o << p2 << "lo" << i << " = rs_imin(lo" << i << ", " << names[1 + i] << "); hi" << i << " = rs_imax(hi" << i
            << ", " << names[1 + i] << ");\n";
      });
      o << "    long long cells = 1;\n";
      for (std::size_t i = 0; i < d; ++i) {
        o << "    " << v.name << "_lo[" << i << "] = count ? lo" << i << " : 0;\n";
        o << "    " << v.name << "_ext[" << i << "] = count ? hi" << i << " - lo" << i << " + 1 : 1;\n";
        o << "    cells *= " << v.name << "_ext[" << i << "];\n";
      }
      o << "    " << v.name << "_val = calloc((size_t)cells, sizeof(scalar));\n";
      if (v.kind != VarKind::Input) o << "    " << v.name << "_set = calloc((size_t)cells, 1);\n";
      o << "  }\n";
    }
    auto visit = [&](const VarDecl& v, const std::string& what) {
      Scanner sc(v.domain.system(std::nullopt, true), 1);
      auto names = domain_names(v);
      std::string args;
      for (std::size_t i = 1; i < names.size(); ++i) args += (i > 1 ? ", " : "") + names[i];
      o << (what == "read" ? "  {\n" : "  {\n    int first = 1;\n");
      scan(o, sc, names, 1, 4, [&](int depth) {
        std::string p2(static_cast<std::size_t>(depth), ' ');
        if (what == "read")
          o << p2 << v.name << "_val[" << v.name << "_at(" << args << ")] = get();\n";
        else
          o << p2 << "if (!first) putchar(' ');\n" << p2 << "first = 0;\n" << p2 << "put(get_" << v.name << "(" << args
            << "));\n";
      });
      if (what != "read") o << "    putchar('\\n');\n";
      o << "  }\n";
    };
    for (const auto& v : p_.vars)
      if (v.kind == VarKind::Input) visit(v, "read");
    for (const auto& v : p_.vars)
      if (v.kind == VarKind::Output) visit(v, "write");
    o << "  return 0;\n}\n";
  }

  const Program& p_;
  bool floats_ = false;
  std::string t_;
  std::set<std::string> reserved_;
  int temps_ = 0;
};

}  // namespace detail

/// Memoized, demand-driven C source: one accessor per computed variable and
/// a harness reading N and the inputs, then printing every output.
inline CUnit emit_c(const Program& p) { return detail::CEmitter(p).run(); }

}  // namespace redsimpl
