#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "redsimpl/affine.hpp"
#include "redsimpl/lexer.hpp"
#include "redsimpl/polyhedron.hpp"

namespace redsimpl {

/// Parses an affine expression over `names` and the size parameter.
inline AffineForm parse_affine(TokenStream& ts, const std::vector<std::string>& names, const std::string& param) {
  auto lookup = [&](const Token& t) {
    AffineForm f(names.size());
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == t.text) {
        f.coeffs[i] = 1;
        return f;
      }
    if (t.text == param) {
      f.param = 1;
      return f;
    }
    throw SyntaxError("unknown index name '" + t.text + "'", t.span);
  };
  std::function<AffineForm()> sum;
  std::function<AffineForm()> factor = [&]() -> AffineForm {
    if (ts.accept("-")) return -factor();
    if (ts.accept("(")) {
      AffineForm f = sum();
      ts.expect(")");
      return f;
    }
    const Token& t = ts.peek();
    if (t.kind == Tok::Number) {
      if (t.text.find('.') != std::string::npos) ts.error("index expressions must be integral");
      ts.next();
      return AffineForm::constant_form(names.size(), std::stoll(t.text));
    }
    if (t.kind == Tok::Name) return lookup(ts.next());
    ts.error("expected an affine expression");
  };
  auto term = [&]() {
    AffineForm f = factor();
    while (ts.is("*")) {
      const Token& star = ts.next();
      AffineForm g = factor();
      if (f.is_constant())
        f = g.scaled(f.constant);
      else if (g.is_constant())
        f = f.scaled(g.constant);
      else
        throw SyntaxError("product of two index expressions is not affine", star.span);
    }
    return f;
  };
  sum = [&]() {
    AffineForm f = ts.accept("+") ? term() : term();
    while (ts.is("+") || ts.is("-")) {
      bool minus = ts.next().text == "-";
      AffineForm g = term();
      f = minus ? f - g : f + g;
    }
    return f;
  };
  return sum();
}

/// Parses "a op b op c ..." relational chains joined by `and`.
inline std::vector<Constraint> parse_conjunction(TokenStream& ts, const std::vector<std::string>& names,
                                                 const std::string& param) {
  std::vector<Constraint> out;
  if (ts.accept("true")) return out;
  do {
    AffineForm lhs = parse_affine(ts, names, param);
    bool any = false;
    for (;;) {
      std::string op = ts.peek().text;
      if (op != "<" && op != "<=" && op != ">" && op != ">=" && op != "=" && op != "==") break;
      ts.next();
      AffineForm rhs = parse_affine(ts, names, param);
      if (op == "<=") out.push_back(Constraint::ge(rhs - lhs));
      if (op == "<") out.push_back(Constraint::ge((rhs - lhs).shifted(-1)));
      if (op == ">=") out.push_back(Constraint::ge(lhs - rhs));
      if (op == ">") out.push_back(Constraint::ge((lhs - rhs).shifted(-1)));
      if (op == "=" || op == "==") out.push_back(Constraint::eq(lhs - rhs));
      lhs = rhs;
      any = true;
    }
    if (!any) ts.error("expected a comparison");
  } while (ts.accept("and") || ts.accept("&&"));
  return out;
}

inline std::vector<std::string> parse_name_list(TokenStream& ts) {
  std::vector<std::string> names;
  ts.expect("[");
  if (!ts.is("]")) {
    do {
      names.push_back(ts.expect_name());
    } while (ts.accept(","));
  }
  ts.expect("]");
  return names;
}

/// `{[i,j] : 0 <= j and j <= i and i < N}`; the condition part is optional.
inline ParamPolyhedron parse_set(TokenStream& ts, const std::string& param) {
  ts.expect("{");
  auto names = parse_name_list(ts);
  ParamPolyhedron p(names, {}, param);
  if (ts.accept(":") || ts.accept("|"))
    for (auto& c : parse_conjunction(ts, names, param)) p.add(std::move(c));
  ts.expect("}");
  return p;
}

inline ParamPolyhedron parse_set(std::string_view text, const std::string& param = "N") {
  TokenStream ts(tokenize(text));
  auto p = parse_set(ts, param);
  if (!ts.at_end()) ts.error("trailing text after set");
  return p;
}

}  // namespace redsimpl
