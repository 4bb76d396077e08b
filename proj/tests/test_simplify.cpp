#include <gtest/gtest.h>

#include "common.hpp"
#include "redsimpl/exec.hpp"
#include "redsimpl/simplify.hpp"

using namespace redsimpl;

namespace {

const Site kRoot{0, {}};

IntVector rho_of_class_containing(std::vector<Labeling> ls, const IntVector& member) {
  for (auto& l : ls)
    if (l.reuse_set.contains(member, 1)) return select_rho(l);
  return {};
}

}  // namespace

TEST(Labelings, TetrahedronHasTwelveClasses) {
  auto ls = site_labelings(load_program("double_scan"), kRoot);
  EXPECT_EQ(ls.size(), 12u);
  EXPECT_EQ(rho_of_class_containing(ls, {0, 5, 0}), (IntVector{0, 1, 0}));
  EXPECT_EQ(rho_of_class_containing(ls, {1, 3, 0}), (IntVector{1, 2, 0}));
  EXPECT_EQ(rho_of_class_containing(ls, {-2, 1, 0}), (IntVector{-1, 1, 0}));
  for (auto& l : ls) {
    auto rho = select_rho(l);
    for (std::size_t k = 0; k < l.normals.size(); ++k) {
      Int v = dot(rho, l.normals[k]);
      Sign expect = v > 0 ? Sign::Plus : v < 0 ? Sign::Minus : Sign::Zero;
      EXPECT_EQ(l.assignment[k], expect);
    }
  }
}

TEST(Labelings, TriangleHasTwo) {
  auto ls = site_labelings(load_program("prefix_sum"), kRoot);
  ASSERT_EQ(ls.size(), 2u);
  std::set<IntVector> rhos;
  for (auto& l : ls) rhos.insert(select_rho(l));
  EXPECT_EQ(rhos, (std::set<IntVector>{{1, 1}, {-1, -1}}));
}

TEST(Labelings, NoReuse) {
  EXPECT_EQ(thrown_code([] { site_labelings(load_program("distrib"), kRoot); }), ErrorCode::NoReuse);
}

TEST(SingleStep, PrefixSumBecomesRecurrence) {
  auto p = load_program("prefix_sum");
  for (auto& l : site_labelings(p, kRoot)) {
    if (select_rho(l) != IntVector{1, 1}) continue;
    auto q = single_step_simplify(p, kRoot, l);
    EXPECT_EQ(print_expr(q.equations[0].rhs, {"i"}),
              "case {\n    {[i] : i = 0} -> X[i];\n    {[i] : i < N and 0 < i} -> Y[i - 1] + X[i];\n  }");
    EXPECT_EQ(q.vars.size(), 2u);
    EXPECT_TRUE(verify_equivalence(p, q, {1, 2, 3, 8}, 2, 5).pass);
  }
}

TEST(SingleStep, MaxNeedsInverseBeforeDecomposition) {
  auto p = load_program("decomp_max");
  auto ls = site_labelings(p, kRoot);
  ASSERT_FALSE(ls.empty());
  for (auto& l : ls) {
    select_rho(l);
    EXPECT_EQ(thrown_code([&] { single_step_simplify(p, kRoot, l); }), ErrorCode::NeedsInverse) << l.signs();
  }
}

TEST(SingleStep, AfterDecompositionOnlyOneDirectionWorks) {
  auto p = load_program("decomp_max");
  auto q = decompose(p, kRoot, AffineForm({0, 1, 1}, 0, 0));
  EXPECT_EQ(print_expr(q.equations[0].rhs, {"i"}),
            "reduce(max, [i,m]->[i], {[i,m] : m <= 3*i and 2*i <= m and i < N}, Z[i, m])");
  Site z{1, {}};
  int ok = 0;
  for (auto& l : site_labelings(q, z)) {
    auto rho = select_rho(l);
    try {
      auto s = single_step_simplify(q, z, l);
      EXPECT_EQ(rho, (IntVector{-1, 0, 0}));
      EXPECT_TRUE(verify_equivalence(p, s, {1, 2, 5, 9}, 2, 3).pass);
      ++ok;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NeedsInverse);
    }
  }
  EXPECT_EQ(ok, 1);
}

TEST(Decompose, Errors) {
  auto p = load_program("decomp_max");
  EXPECT_EQ(thrown_code([&] { decompose(p, kRoot, AffineForm({1, 0, 0}, 0, 0)); }), ErrorCode::DependentIndex);
  auto prefix = load_program("prefix_sum");
  EXPECT_EQ(thrown_code([&] { decompose(prefix, kRoot, AffineForm({0, 1}, 0, 0)); }), ErrorCode::Degenerate);
}

TEST(Decompose, Proposals) {
  auto text = [](const Program& p) {
    const auto& r = *p.equations[0].rhs->as<Reduce>();
    std::vector<std::string> out;
    for (const auto& f : propose_decompositions(r)) out.push_back(format_affine(f, r.body_domain.names(), "N"));
    return out;
  };
  EXPECT_EQ(text(load_program("distrib")), (std::vector<std::string>{"j + k", "k", "j"}));
  EXPECT_EQ(text(load_program("decomp_max")), (std::vector<std::string>{"j", "k", "j + k"}));
  auto constant = parse_program_or_throw(
      "param N;\ninput int X : {[i] : 0 <= i < N};\noutput int Y : {[i] : 0 <= i < N};\n"
      "Y[i] = reduce(+, [i,j,k]->[i], {[i,j,k] : 0 <= j <= i and 0 <= k <= i}, X[0]);\n");
  EXPECT_TRUE(propose_decompositions(*constant.equations[0].rhs->as<Reduce>()).size() == 2u);
}

TEST(Factor, PullsInvariantTermToReaders) {
  auto p = load_program("distrib");
  auto q = decompose(p, kRoot, AffineForm({0, 1, 1}, 0, 0));
  auto f = factor_invariant(q, Site{1, {}});
  EXPECT_EQ(print_expr(f.equations[0].rhs, {"i"}),
            "reduce(+, [i,m]->[i], {[i,m] : m <= 2*i and i < N and 0 <= m}, A[i, m] * Z[i, m])");
  EXPECT_EQ(print_expr(f.equations[1].rhs, {"i", "m"}),
            "reduce(+, [i,m,k]->[i,m], {[i,m,k] : k <= m and m <= i + k and 0 <= k and k <= i}, B[k, m - k])");
  EXPECT_TRUE(verify_equivalence(p, f, {1, 2, 4, 7}, 2, 9).pass);
}

TEST(Factor, Errors) {
  auto min_times = parse_program_or_throw(
      "param N;\ninput int X : {[i] : 0 <= i < N};\noutput int Y : {[i] : 0 <= i < N};\n"
      "Y[i] = reduce(min, [i,j]->[i], {[i,j] : 0 <= j <= i}, X[i] * X[j]);\n");
  EXPECT_EQ(thrown_code([&] { factor_invariant(min_times, kRoot); }), ErrorCode::NotDistributive);
  EXPECT_NO_THROW(factor_invariant(min_times, kRoot, true));
  EXPECT_EQ(thrown_code([&] { factor_invariant(load_program("distrib"), kRoot); }), ErrorCode::NotInvariant);
}

TEST(Search, CorpusVariantCounts) {
  auto count = [](const char* name) { return simplify_all(load_program(name)).variants.size(); };
  EXPECT_EQ(count("prefix_sum"), 2u);
  EXPECT_EQ(count("decomp_max"), 1u);
  EXPECT_EQ(count("distrib"), 2u);
  auto ds = simplify_all(load_program("double_scan"));
  EXPECT_EQ(ds.variants.size(), 16u);
  EXPECT_EQ(ds.distinct_programs, 15u);
  for (const auto& v : ds.variants) EXPECT_EQ(v.degree(), 1u);
}

TEST(Search, Deterministic) {
  auto a = simplify_all(load_program("double_scan"));
  auto b = simplify_all(load_program("double_scan"));
  ASSERT_EQ(a.variants.size(), b.variants.size());
  for (std::size_t k = 0; k < a.variants.size(); ++k)
    EXPECT_EQ(print_program(a.variants[k].program), print_program(b.variants[k].program));
}

TEST(Search, BudgetIsReported) {
  SearchOptions opt;
  opt.max_nodes = 3;
  auto res = simplify_all(load_program("double_scan"), opt);
  EXPECT_TRUE(res.budget_exceeded);
}

TEST(Normalize, CaseBodiesSplit) {
  auto p = normalize_case_bodies(load_program("rna_iloops"));
  auto b = p.equations[0].rhs->as<Binary>();
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->op, Op::Min);
  EXPECT_NE(b->lhs->as<Reduce>(), nullptr);
  EXPECT_NE(b->rhs->as<Reduce>(), nullptr);
}
