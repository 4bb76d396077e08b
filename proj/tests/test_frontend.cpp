#include <gtest/gtest.h>

#include "common.hpp"
#include "redsimpl/frontend.hpp"

using namespace redsimpl;

TEST(Frontend, ParsesPrefixSum) {
  auto p = load_program("prefix_sum");
  EXPECT_EQ(p.vars.size(), 2u);
  ASSERT_EQ(p.equations.size(), 1u);
  auto r = p.equations[0].rhs->as<Reduce>();
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->op, Op::Add);
  EXPECT_EQ(r->body_domain.to_string(), "{[i,j] : 0 <= j and j <= i and i < N}");
  EXPECT_EQ(reduce_sites(p).size(), 1u);
}

TEST(Frontend, EmptyInputIsASyntaxError) {
  auto r = parse_program("");
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].code, "SYNTAX_ERROR");
  EXPECT_EQ(thrown_code([] { parse_program_or_throw("param N; param M;"); }), ErrorCode::SyntaxError);
}

TEST(Frontend, AbsDesugarsToTwoBranchCase) {
  auto p = load_program("rna_iloops");
  const auto& r = *p.equations[0].rhs->as<Reduce>();
  const auto* top = r.body->as<Binary>();
  ASSERT_NE(top, nullptr);
  const auto* c = top->rhs->as<Case>();
  ASSERT_NE(c, nullptr);
  ASSERT_EQ(c->branches.size(), 2u);
  EXPECT_EQ(c->branches[0].guard.to_string(), "{[i,j,p,q] : i + j <= p + q}");
  EXPECT_EQ(c->branches[1].guard.to_string(), "{[i,j,p,q] : p + q < i + j}");
  EXPECT_EQ(print_expr(c->branches[1].expr, r.body_domain.names()), "C[i + j - p - q]");
}

TEST(Frontend, RoundTripsEveryCorpusProgram) {
  for (const char* name : kCorpus) {
    auto p = load_program(name);
    auto text = print_program(p);
    auto q = parse_program_or_throw(text);
    EXPECT_EQ(print_program(q), text) << name;
  }
}

TEST(Frontend, ValidateReportsProblemsWithSpans) {
  auto undeclared = parse_program("param N;\noutput int Y : {[i] : 0 <= i < N};\nY[i] = Z[i];\n");
  ASSERT_FALSE(undeclared.diagnostics.empty());
  EXPECT_EQ(undeclared.diagnostics[0].code, "UNDECLARED_VAR");
  EXPECT_EQ(undeclared.diagnostics[0].span.line, 3u);

  auto overlap = parse_program(
      "param N;\ninput int X : {[i] : 0 <= i < N};\noutput int Y : {[i] : 0 <= i < N};\n"
      "Y[i] = case { {[i] : i <= 2} -> X[i]; {[i] : i >= 2} -> 0; };\n");
  ASSERT_FALSE(overlap.diagnostics.empty());
  EXPECT_EQ(overlap.diagnostics[0].code, "GUARD_OVERLAP");

  auto gap = parse_program(
      "param N;\ninput int X : {[i] : 0 <= i < N};\noutput int Y : {[i] : 0 <= i < N};\n"
      "Y[i] = case { {[i] : i <= 1} -> X[i]; {[i] : i >= 3} -> 0; };\n");
  ASSERT_FALSE(gap.diagnostics.empty());
  EXPECT_EQ(gap.diagnostics[0].code, "GUARD_COVERAGE");

  auto outside = parse_program(
      "param N;\ninput int X : {[i] : 0 <= i < N};\noutput int Y : {[i] : 0 <= i < N};\nY[i] = X[i + 1];\n");
  ASSERT_FALSE(outside.diagnostics.empty());
  EXPECT_EQ(outside.diagnostics[0].code, "READ_OUT_OF_DOMAIN");

  EXPECT_TRUE(parse_program(read_program_text("prefix_sum")).ok());
}

TEST(Frontend, PrintsCaseEquations) {
  auto p = parse_program_or_throw(
      "param N;\ninput int X : {[i] : 0 <= i < N};\noutput int Y : {[i] : 0 <= i < N};\n"
      "Y[i] = case { {[i] : i = 0} -> X[i]; {[i] : i >= 1} -> Y[i - 1] + X[i]; };\n");
  EXPECT_EQ(print_expr(p.equations[0].rhs, {"i"}),
            "case {\n    {[i] : i = 0} -> X[i];\n    {[i] : 0 < i} -> Y[i - 1] + X[i];\n  }");
  p.provenance.push_back("simplify Y along [1]");
  EXPECT_EQ(print_program(p).rfind("# simplify Y along [1]\n", 0), 0u);
}

TEST(Frontend, SubstituteDefinitionFlattensNestedSums) {
  auto p = load_program("abft_mm");
  auto q = substitute_definition(p, "gamma", "C");
  const auto& r = *q.find_equation("gamma")->rhs->as<Reduce>();
  EXPECT_EQ(r.body_domain.dims(), 3u);
  EXPECT_EQ(print_expr(q.find_equation("gamma")->rhs, {"i"}),
            "reduce(+, [i,j,k]->[i], {[i,j,k] : 0 <= k and k < N and 0 <= j and j < N}, A[i, k] * B[k, j])");
  EXPECT_EQ(thrown_code([&] { substitute_definition(p, "C", "C"); }), ErrorCode::RecursiveDefinition);
  auto same = substitute_definition(p, "C", "gamma");
  EXPECT_EQ(canonical_text(same), canonical_text(p));
}

TEST(Ir, DependenceMapsAndReuse) {
  auto p = load_program("prefix_sum");
  const auto& r = *p.equations[0].rhs->as<Reduce>();
  auto dm = dependence_map(r);
  ASSERT_EQ(dm.rows.size(), 1u);
  EXPECT_EQ(dm.rows[0].coeffs, (IntVector{1, -1}));
  EXPECT_EQ(reuse_space(r).basis, (std::vector<IntVector>{{1, 1}}));

  auto d = load_program("double_scan");
  EXPECT_EQ(reuse_space(*d.equations[0].rhs->as<Reduce>()).basis, (std::vector<IntVector>{{1, 0, 0}, {0, 1, 0}}));

  auto dist = load_program("distrib");
  EXPECT_EQ(dependence_map(*dist.equations[0].rhs->as<Reduce>()).rows.size(), 4u);
  EXPECT_EQ(reuse_space(*dist.equations[0].rhs->as<Reduce>()).dim(), 0u);
}
