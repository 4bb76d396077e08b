#include <gtest/gtest.h>

#include "redsimpl/ratlin.hpp"

using namespace redsimpl;

TEST(Ratlin, RankOfSmallMatrices) {
  EXPECT_EQ(rank(RatMatrix::from_rows({{1, -1}}, 2)), 1u);
  EXPECT_EQ(rank(RatMatrix::from_rows({{0, 0, 1}}, 3)), 1u);
  EXPECT_EQ(rank(RatMatrix::identity(3)), 3u);
  EXPECT_EQ(rank(RatMatrix::from_rows({{1, 2}, {2, 4}}, 2)), 1u);
}

TEST(Ratlin, NullSpaceIsPrimitiveAndOrdered) {
  auto a = null_space_basis(RatMatrix::from_rows({{1, -1}}, 2));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], (IntVector{1, 1}));

  auto b = null_space_basis(RatMatrix::from_rows({{0, 0, 1}}, 3));
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0], (IntVector{1, 0, 0}));
  EXPECT_EQ(b[1], (IntVector{0, 1, 0}));

  EXPECT_TRUE(null_space_basis(RatMatrix::identity(3)).empty());
}

TEST(Ratlin, NullSpaceVectorsAnnihilateAndComplementRank) {
  std::vector<IntVector> rows = {{2, 4, -6, 0}, {1, 0, 3, -3}};
  auto m = RatMatrix::from_rows(rows, 4);
  auto basis = null_space_basis(m);
  EXPECT_EQ(rank(m) + basis.size(), 4u);
  for (const auto& v : basis) {
    EXPECT_EQ(v, primitive(std::span<const Int>(v)));
    for (const auto& r : rows) EXPECT_EQ(dot(r, v), 0);
  }
}

TEST(Ratlin, SolveRational) {
  std::vector<Rational> b = {Rational(3), Rational(-2)};
  auto x = solve_rational(RatMatrix::identity(2), b);
  ASSERT_TRUE(x);
  EXPECT_EQ((*x)[0], 3);
  EXPECT_EQ((*x)[1], -2);

  auto m = RatMatrix::from_rows({{1, 1}}, 2);
  std::vector<Rational> b1 = {Rational(3)};
  auto y = solve_rational(m, b1);
  ASSERT_TRUE(y);
  EXPECT_EQ(m.multiply(*y)[0], 3);

  std::vector<Rational> b2 = {Rational(1), Rational(2)};
  EXPECT_FALSE(solve_rational(RatMatrix::from_rows({{1, 0}, {1, 0}}, 2), b2));
}

TEST(Ratlin, FloorAndCeilDivision) {
  EXPECT_EQ(floor_div(-3, 2), -2);
  EXPECT_EQ(floor_div(3, 2), 1);
  EXPECT_EQ(ceil_div(-3, 2), -1);
  EXPECT_EQ(ceil_div(3, 2), 2);
  EXPECT_EQ(floor_div(3, -2), -2);
}

TEST(Ratlin, OverflowIsReported) {
  try {
    checked_mul(std::numeric_limits<Int>::max(), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Overflow);
  }
}
