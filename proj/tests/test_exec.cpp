#include <gtest/gtest.h>

#include "common.hpp"
#include "redsimpl/count.hpp"
#include "redsimpl/exec.hpp"

using namespace redsimpl;

namespace {

const char* kRecurrence =
    "param N;\ninput int X : {[i] : 0 <= i < N};\noutput int Y : {[i] : 0 <= i < N};\n"
    "Y[i] = case { {[i] : i = 0} -> X[i]; {[i] : i >= 1} -> Y[i - 1] + X[i]; };\n";

Bindings<Exact> ints(const std::string& var, std::vector<Int> vals) {
  Bindings<Exact> b;
  for (std::size_t i = 0; i < vals.size(); ++i) b[var][IntVector{static_cast<Int>(i)}] = Arith<Exact>::from_int(vals[i]);
  return b;
}

std::vector<Rational> values(const Materialized<Exact>& m) {
  std::vector<Rational> out;
  for (const auto& [z, v] : m) out.push_back(v.v);
  return out;
}

}  // namespace

TEST(Exec, PrefixSumByBruteForce) {
  auto res = evaluate(load_program("prefix_sum"), ints("X", {1, 2, 3}), 3);
  EXPECT_EQ(values(res.outputs.at("Y")), (std::vector<Rational>{1, 3, 6}));
  EXPECT_EQ(res.counters.body_applications, 6u);
}

TEST(Exec, RecurrenceMatchesAndCountsLinearly) {
  auto p = parse_program_or_throw(kRecurrence);
  auto res = evaluate(p, ints("X", {1, 2, 3}), 3);
  EXPECT_EQ(values(res.outputs.at("Y")), (std::vector<Rational>{1, 3, 6}));
  for (auto [n, ops] : op_profile(p, {1, 2, 3, 4, 5, 6, 7, 8})) EXPECT_EQ(ops, static_cast<std::uint64_t>(n - 1));
  for (auto [n, ops] : op_profile(load_program("prefix_sum"), {1, 2, 3, 4, 5, 6, 7, 8}))
    EXPECT_EQ(ops, static_cast<std::uint64_t>(n * (n + 1) / 2));
}

TEST(Exec, DetectsCycles) {
  auto p = parse_program_or_throw("param N;\noutput int Z : {[i] : 0 <= i < N};\nZ[i] = Z[i] + 1;\n");
  EXPECT_EQ(thrown_code([&] { evaluate(p, Bindings<Exact>{}, 3); }), ErrorCode::Cycle);
}

TEST(Exec, ReportsUnboundInputs) {
  EXPECT_EQ(thrown_code([] { evaluate(load_program("prefix_sum"), Bindings<Exact>{}, 3); }), ErrorCode::UnboundInput);
}

TEST(Exec, MemoizationDoesNotRecount) {
  auto p = load_program("prefix_sum");
  auto in = ints("X", {4, 5, 6, 7});
  std::uint64_t first = 0, second = 0;
  run_with_big_stack([&] {
    EvalSession<Exact> s(p, 4, in);
    auto a = s.outputs();
    first = s.counters().body_applications;
    auto b = s.outputs();
    second = s.counters().body_applications;
    EXPECT_EQ(values(a.at("Y")), values(b.at("Y")));
  });
  EXPECT_EQ(first, second);
}

TEST(Exec, VerifyEquivalence) {
  auto rep = verify_equivalence(load_program("prefix_sum"), parse_program_or_throw(kRecurrence), {1, 2, 5, 9, 32}, 3, 7);
  EXPECT_TRUE(rep.pass) << rep.first_mismatch;
  EXPECT_EQ(rep.max_abs_error, 0);
  auto again = verify_equivalence(load_program("prefix_sum"), parse_program_or_throw(kRecurrence), {1, 2, 5, 9, 32}, 3, 7);
  EXPECT_EQ(again.points_compared, rep.points_compared);

  auto wrong = parse_program_or_throw(
      "param N;\ninput int X : {[i] : 0 <= i < N};\noutput int Y : {[i] : 0 <= i < N};\nY[i] = X[i];\n");
  EXPECT_FALSE(verify_equivalence(load_program("prefix_sum"), wrong, {3}, 2, 1).pass);

  auto other = parse_program_or_throw(
      "param N;\ninput int X : {[i] : 0 <= i < N};\noutput int Y : {[i,j] : 0 <= i < N and 0 <= j < N};\nY[i,j] = X[i];\n");
  EXPECT_EQ(thrown_code([&] { verify_equivalence(load_program("prefix_sum"), other, {3}, 1, 1); }),
            ErrorCode::SignatureMismatch);
}

TEST(Exec, FloatMinPlusWithInfinity) {
  auto p = load_program("rna_iloops");
  auto res = evaluate(p, random_inputs<double>(p, 6, 3), 6);
  const auto& y = res.outputs.at("Y");
  EXPECT_TRUE(std::isinf(y.front().second));  // Y[0,1] reduces over nothing
  EXPECT_EQ(res.counters.body_applications, 15u);  // C(6,4) interior pairs
}
