#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "redsimpl/ir.hpp"
#include "redsimpl/lexer.hpp"
#include "redsimpl/set_text.hpp"
#include "redsimpl/validate.hpp"

namespace redsimpl {

struct ParseResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return program.has_value() && diagnostics.empty(); }
};

namespace detail {

inline Rational parse_number(const std::string& text) {
  auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(mpz_class(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  mpz_class den = 1;
  for (std::size_t k = dot + 1; k < text.size(); ++k) den *= 10;
  Rational r(mpz_class(digits), den);
  r.canonicalize();
  return r;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : ts_(tokenize(text)) {}

  Program program(std::map<std::string, SourceSpan>& spans) {
    Program p;
    if (ts_.at_end()) ts_.error("expected 'param'");
    ts_.expect("param");
    p.param = ts_.expect_name();
    ts_.expect(";");
    param_ = p.param;
    for (;;) {
      const Token& t = ts_.peek();
      if (t.text == "param") throw SyntaxError("only one size parameter is supported", t.span);
      std::optional<VarKind> kind;
      if (t.text == "input") kind = VarKind::Input;
      if (t.text == "output") kind = VarKind::Output;
      if (t.text == "local") kind = VarKind::Local;
      if (!kind) break;
      ts_.next();
      VarDecl d;
      d.kind = *kind;
      std::string ty = ts_.expect_name();
      if (ty == "int")
        d.scalar = ScalarKind::Integer;
      else if (ty == "rat")
        d.scalar = ScalarKind::Rational;
      else if (ty == "float")
        d.scalar = ScalarKind::Float;
      else
        throw SyntaxError("unknown scalar type '" + ty + "'", t.span);
      spans[ts_.peek().text] = ts_.peek().span;
      d.name = ts_.expect_name();
      ts_.expect(":");
      d.domain = parse_set(ts_, p.param);
      ts_.expect(";");
      p.vars.push_back(std::move(d));
    }
    while (!ts_.at_end()) {
      const Token& head = ts_.peek();
      if (head.text == "param") throw SyntaxError("only one size parameter is supported", head.span);
      Equation eq;
      SourceSpan at = head.span;
      eq.var = ts_.expect_name();
      if (!spans.count("=" + eq.var)) spans["=" + eq.var] = at;
      eq.indices = parse_name_list(ts_);
      ts_.expect("=");
      eq.rhs = expr(eq.indices);
      ts_.expect(";");
      p.equations.push_back(std::move(eq));
    }
    return p;
  }

 private:
  ExprPtr expr(const std::vector<std::string>& names) {
    ExprPtr e = term(names);
    while (ts_.is("+") || ts_.is("-")) {
      Op op = ts_.next().text == "+" ? Op::Add : Op::Sub;
      e = make_binary(op, e, term(names));
    }
    return e;
  }

  ExprPtr term(const std::vector<std::string>& names) {
    ExprPtr e = unary(names);
    while (ts_.is("*") || ts_.is("/")) {
      Op op = ts_.next().text == "*" ? Op::Mul : Op::Div;
      ExprPtr rhs = unary(names);
      auto a = e->as<Const>(), b = rhs->as<Const>();
      if (op == Op::Div && a && b && !a->infinity && !b->infinity && b->value != 0)
        e = make_const(a->value / b->value);
      else
        e = make_binary(op, e, rhs);
    }
    return e;
  }

  ExprPtr unary(const std::vector<std::string>& names) {
    if (ts_.accept("-")) {
      ExprPtr e = unary(names);
      if (auto c = e->as<Const>()) {
        if (c->infinity != 0) return make_infinity(-c->infinity);
        return make_const(-c->value);
      }
      return make_binary(Op::Sub, make_const(0), e);
    }
    return primary(names);
  }

  ExprPtr primary(const std::vector<std::string>& names) {
    const Token& t = ts_.peek();
    if (t.kind == Tok::Number) return make_const(parse_number(ts_.next().text));
    if (ts_.accept("(")) {
      ExprPtr e = expr(names);
      ts_.expect(")");
      return e;
    }
    if (t.kind != Tok::Name) ts_.error("expected an expression");
    if (t.text == "inf") {
      ts_.next();
      return make_infinity(+1);
    }
    if (t.text == "reduce") return reduce(names);
    if (t.text == "case") return case_expr(names);
    if ((t.text == "min" || t.text == "max") && ts_.peek(1).text == "(") {
      Op op = ts_.next().text == "min" ? Op::Min : Op::Max;
      ts_.expect("(");
      ExprPtr e = expr(names);
      ts_.expect(",");
      do {
        e = make_binary(op, e, expr(names));
      } while (ts_.accept(","));
      ts_.expect(")");
      return e;
    }
    return read(names);
  }

  // X[e1, abs(e2), ...]; every abs() becomes a sign split around the read.
  ExprPtr read(const std::vector<std::string>& names) {
    std::string var = ts_.expect_name();
    ts_.expect("[");
    std::vector<AffineForm> rows;
    std::vector<std::size_t> abs_rows;
    if (!ts_.is("]")) {
      do {
        if (ts_.is("abs") && ts_.peek(1).text == "(") {
          ts_.next();
          ts_.expect("(");
          abs_rows.push_back(rows.size());
          rows.push_back(parse_affine(ts_, names, param_));
          ts_.expect(")");
        } else {
          rows.push_back(parse_affine(ts_, names, param_));
        }
      } while (ts_.accept(","));
    }
    ts_.expect("]");
    return split_abs(var, AffineMap{names.size(), rows}, abs_rows, 0, names);
  }

  ExprPtr split_abs(const std::string& var, const AffineMap& m, const std::vector<std::size_t>& abs_rows, std::size_t k,
                    const std::vector<std::string>& names) {
    if (k == abs_rows.size()) return make_read(var, m);
    const AffineForm& f = m.rows[abs_rows[k]];
    AffineMap neg = m;
    neg.rows[abs_rows[k]] = -f;
    std::vector<CaseBranch> br;
    br.push_back(CaseBranch{ParamPolyhedron(names, {Constraint::ge(f)}, param_), split_abs(var, m, abs_rows, k + 1, names)});
    br.push_back(CaseBranch{ParamPolyhedron(names, {Constraint::ge((-f).shifted(-1))}, param_),
                            split_abs(var, neg, abs_rows, k + 1, names)});
    return make_case(std::move(br));
  }

  ExprPtr reduce(const std::vector<std::string>& names) {
    ts_.expect("reduce");
    ts_.expect("(");
    const Token& opt = ts_.next();
    auto op = op_from_symbol(opt.text);
    if (!op || !is_reduction_op(*op)) throw SyntaxError("'" + opt.text + "' is not a reduction operator", opt.span);
    ts_.expect(",");
    const Token& mt = ts_.peek();
    auto body_names = parse_name_list(ts_);
    ts_.expect("->");
    ts_.expect("[");
    AffineMap proj{body_names.size(), {}};
    if (!ts_.is("]")) {
      do {
        proj.rows.push_back(parse_affine(ts_, body_names, param_));
      } while (ts_.accept(","));
    }
    ts_.expect("]");
    if (proj.out_dims() != names.size())
      throw SyntaxError("projection produces " + std::to_string(proj.out_dims()) + " indices but the context has " +
                            std::to_string(names.size()),
                        mt.span);
    ts_.expect(",");
    const Token& st = ts_.peek();
    auto dom = parse_set(ts_, param_);
    if (dom.names() != body_names) throw SyntaxError("body domain indices must match the projection's", st.span);
    ts_.expect(",");
    ExprPtr body = expr(body_names);
    ts_.expect(")");
    return make_reduce(*op, std::move(proj), std::move(dom), std::move(body));
  }

  ExprPtr case_expr(const std::vector<std::string>& names) {
    ts_.expect("case");
    ts_.expect("{");
    std::vector<CaseBranch> br;
    do {
      const Token& st = ts_.peek();
      auto guard = parse_set(ts_, param_);
      if (guard.dims() != names.size()) throw SyntaxError("case guard arity differs from its context", st.span);
      guard = guard.renamed(names);
      ts_.expect("->");
      ExprPtr e = expr(names);
      ts_.expect(";");
      br.push_back(CaseBranch{std::move(guard), std::move(e)});
    } while (!ts_.is("}"));
    ts_.expect("}");
    return make_case(std::move(br));
  }

  TokenStream ts_;
  std::string param_ = "N";
};

}  // namespace detail

/// Parses program text; on success the program is also validated and any
/// findings are returned with spans into the text.
inline ParseResult parse_program(std::string_view text) {
  ParseResult res;
  std::map<std::string, SourceSpan> spans;
  try {
    detail::Parser ps(text);
    res.program = ps.program(spans);
  } catch (const SyntaxError& e) {
    res.diagnostics.push_back(Diagnostic{"error", "SYNTAX_ERROR", e.what(), e.span(), {}});
    return res;
  }
  res.diagnostics = validate(*res.program);
  for (auto& d : res.diagnostics) {
    if (spans.count("=" + d.subject))
      d.span = spans["=" + d.subject];
    else if (spans.count(d.subject))
      d.span = spans[d.subject];
  }
  return res;
}

/// Parses and validates, throwing on the first problem.
inline Program parse_program_or_throw(std::string_view text) {
  auto r = parse_program(text);
  if (!r.diagnostics.empty()) {
    const auto& d = r.diagnostics.front();
    fail(d.code == "SYNTAX_ERROR" ? ErrorCode::SyntaxError : ErrorCode::InvalidProgram,
         d.code == "SYNTAX_ERROR" ? d.message
                                  : std::to_string(d.span.line) + ":" + std::to_string(d.span.column) + ": " + d.code + ": " + d.message);
  }
  return *r.program;
}

namespace detail {

inline std::string format_rational(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return "(" + r.get_num().get_str() + "/" + r.get_den().get_str() + ")";
}

inline std::string format_access(const std::string& var, const AffineMap& m, const std::vector<std::string>& names,
                                 const std::string& param) {
  std::string s = var + "[";
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    if (i) s += ", ";
    s += format_affine(m.rows[i], names, param);
  }
  return s + "]";
}

inline int precedence(const Expr& e) {
  if (auto b = e.as<Binary>()) {
    if (b->op == Op::Add || b->op == Op::Sub) return 1;
    if (b->op == Op::Mul || b->op == Op::Div) return 2;
  }
  if (auto c = e.as<Const>()) {
    if (c->infinity < 0 || c->value < 0) return 1;
  }
  return 3;
}

class Printer {
 public:
  explicit Printer(std::string param) : param_(std::move(param)) {}

  std::string expr(const ExprPtr& e, const std::vector<std::string>& names, int indent) const {
    if (auto v = e->as<VarRead>()) return format_access(v->name, v->access, names, param_);
    if (auto c = e->as<Const>()) {
      if (c->infinity) return c->infinity > 0 ? "inf" : "-inf";
      if (c->value.get_den() == 1) return c->value.get_num().get_str();
      return format_rational(c->value);
    }
    if (auto b = e->as<Binary>()) {
      if (b->op == Op::Min || b->op == Op::Max)
        return op_symbol(b->op) + "(" + expr(b->lhs, names, indent) + ", " + expr(b->rhs, names, indent) + ")";
      int prec = (b->op == Op::Add || b->op == Op::Sub) ? 1 : 2;
      std::string l = expr(b->lhs, names, indent);
      std::string r = expr(b->rhs, names, indent);
      if (precedence(*b->lhs) < prec) l = "(" + l + ")";
      // Left-associative: the right operand needs parentheses at equal
      // precedence too.
      if (precedence(*b->rhs) <= prec) r = "(" + r + ")";
      return l + " " + op_symbol(b->op) + " " + r;
    }
    if (auto c = e->as<Case>()) {
      std::string pad(static_cast<std::size_t>(indent + 2) * 2, ' ');
      std::string s = "case {\n";
      for (const auto& br : c->branches)
        s += pad + br.guard.renamed(names).to_string() + " -> " + expr(br.expr, names, indent + 2) + ";\n";
      return s + std::string(static_cast<std::size_t>(indent + 1) * 2, ' ') + "}";
    }
    const auto& r = *e->as<Reduce>();
    const auto& bn = r.body_domain.names();
    std::string s = "reduce(" + op_symbol(r.op) + ", [";
    for (std::size_t i = 0; i < bn.size(); ++i) s += (i ? "," : "") + bn[i];
    s += "]->[";
    for (std::size_t i = 0; i < r.projection.rows.size(); ++i)
      s += (i ? "," : "") + format_affine(r.projection.rows[i], bn, param_);
    s += "], " + r.body_domain.to_string() + ", " + expr(r.body, bn, indent) + ")";
    return s;
  }

 private:
  std::string param_;
};

}  // namespace detail

inline std::string print_expr(const ExprPtr& e, const std::vector<std::string>& names, const std::string& param = "N") {
  return detail::Printer(param).expr(e, names, 0);
}

/// Canonical program text: declarations in order, then equations in order.
inline std::string print_program(const Program& p) {
  std::ostringstream os;
  for (const auto& step : p.provenance) os << "# " << step << "\n";
  os << "param " << p.param << ";\n\n";
  for (const auto& v : p.vars)
    os << var_kind_name(v.kind) << " " << scalar_name(v.scalar) << " " << v.name << " : " << v.domain.to_string() << ";\n";
  os << "\n";
  detail::Printer pr(p.param);
  for (const auto& eq : p.equations) {
    os << eq.var << "[";
    for (std::size_t i = 0; i < eq.indices.size(); ++i) os << (i ? "," : "") << eq.indices[i];
    os << "] = " << pr.expr(eq.rhs, eq.indices, 0) << ";\n";
  }
  return os.str();
}

/// Program text without the provenance comments; used as the identity of a
/// program when deduplicating.
inline std::string canonical_text(const Program& p) {
  Program q = p;
  q.provenance.clear();
  return print_program(q);
}

}  // namespace redsimpl
