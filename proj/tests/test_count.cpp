#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "redsimpl/count.hpp"
#include "redsimpl/set_text.hpp"

using namespace redsimpl;

TEST(Count, CardinalityOfBasicDomains) {
  EXPECT_EQ(cardinality(parse_set("{[i,j] : 0 <= i and i < N and 0 <= j and j < N}")).to_string(), "N^2");
  EXPECT_EQ(cardinality(parse_set("{[i,j] : 0 <= i and i < 10 and 0 <= j and j < N}")).to_string(), "10*N");
  auto tri = cardinality(parse_set("{[i,j] : 0 <= j and j <= i and i < N}"));
  EXPECT_EQ(tri.to_string(), "1/2*N^2 + 1/2*N");
  for (Int n = 0; n < 12; ++n) EXPECT_EQ(tri(n), Rational(n * (n + 1)) / 2);
}

TEST(Count, QuasiPolynomialsNeedPeriods) {
  auto half = cardinality(parse_set("{[i] : 0 <= 2*i and 2*i < N}"));
  EXPECT_EQ(half.period(), 2u);
  for (Int n = 0; n < 20; ++n) EXPECT_EQ(half(n), Rational((n + 1) / 2));
  auto third = cardinality(parse_set("{[i] : 0 <= 4*i and 4*i < N}"));
  EXPECT_EQ(third.period(), 4u);
}

TEST(Count, ProgramOps) {
  auto rna = program_ops(load_program("rna_iloops"));
  EXPECT_EQ(rna.degree(), 4u);
  EXPECT_EQ(rna.total.leading(), Rational(1, 24));
  auto prefix = program_ops(load_program("prefix_sum"));
  EXPECT_EQ(prefix.total.to_string(), "1/2*N^2 + 3/2*N");
}

TEST(Count, MeasuredDegree) {
  std::vector<std::pair<Int, double>> cubic, quartic;
  for (Int n : {10, 20, 40, 80, 160, 320}) {
    cubic.emplace_back(n, std::pow(double(n), 3));
    double nn = double(n);
    quartic.emplace_back(n, nn * nn * nn * nn / 24 + nn * nn * nn / 12 - nn * nn / 24 + 35 * nn / 12 - 1);
  }
  EXPECT_NEAR(measured_degree(cubic), 3.0, 0.01);
  EXPECT_NEAR(measured_degree(quartic), 4.0, 0.05);
  EXPECT_EQ(thrown_code([] { measured_degree(std::vector<std::pair<Int, double>>{{1, 1}, {2, 2}, {3, 3}}); }),
            ErrorCode::InsufficientSamples);
}

TEST(Cardinality, LateStartingSetIsExactFromItsWindow) {
  auto set = parse_set("{[i,j,m] : 0 <= i and j + 1 = N and m < 0 and i + 4 < j + m}");
  auto q = cardinality(set);
  EXPECT_EQ(q.to_string(), "1/2*N^2 - 11/2*N + 15");
  EXPECT_GT(q.valid_from(), 4);
  for (Int n = q.valid_from(); n < q.valid_from() + 30; ++n) EXPECT_EQ(q(n), Rational(static_cast<long>(count_points(set, n)))) << n;
}
