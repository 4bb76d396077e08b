#include <gtest/gtest.h>

#include <set>

#include "redsimpl/polyhedron.hpp"
#include "redsimpl/set_text.hpp"

using namespace redsimpl;

namespace {

const char* kTriangle = "{[i,j] : 0 <= j and j <= i and i < N}";
const char* kSquare = "{[i,j] : 0 <= i and i < N and 0 <= j and j < N}";
const char* kStrip = "{[i,j] : 0 <= i and i < 10 and 0 <= j and j < N}";
const char* kTetra = "{[i,j,k] : 0 <= i and i <= N and 0 <= j and k <= i - j and 0 <= k}";

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Overflow;
}

}  // namespace

TEST(SetText, RoundTripsCanonicalText) {
  auto p = parse_set(kTriangle);
  EXPECT_EQ(p.to_string(), kTriangle);
  EXPECT_EQ(parse_set(p.to_string()), p);
  EXPECT_EQ(parse_set("{[i] : i = 3}").to_string(), "{[i] : i = 3}");
  EXPECT_EQ(parse_set("{[i,j] : 0 <= j <= i < N}"), p);
}

TEST(Polylib, Emptiness) {
  EXPECT_FALSE(is_empty(parse_set("{[i] : 0 <= i < N}")));
  EXPECT_TRUE(is_empty(parse_set("{[i] : i >= 1 and i <= -1}")));
  EXPECT_TRUE(is_empty(parse_set("{[i] : 2*i = 1}")));
  EXPECT_TRUE(is_empty(parse_set("{[i] : 1 <= 2*i <= 1}")));
  EXPECT_TRUE(is_empty(parse_set("{[i] : 0 <= i and i < N and i >= N}")));
}

TEST(Polylib, EmptinessAgreesWithEnumerationAtProbes) {
  for (const char* text : {kTriangle, kSquare, kStrip, kTetra, "{[i,j] : 0 <= i < N and i = j + N}"}) {
    auto p = parse_set(text);
    bool any = !enumerate_points(p, kDefaultMinSize).empty() || !enumerate_points(p, kDefaultMinSize + 1).empty();
    EXPECT_EQ(is_empty(p), !any) << text;
  }
}

TEST(Polylib, DimensionCountsThickFaces) {
  EXPECT_EQ(dimension(parse_set(kSquare)), 2u);
  EXPECT_EQ(dimension(parse_set(kStrip)), 1u);
  EXPECT_EQ(dimension(parse_set("{[i] : i = 3}")), 0u);
  EXPECT_EQ(dimension(parse_set(kTetra)), 3u);
  EXPECT_EQ(code_of([] { dimension(parse_set("{[i] : i >= 1 and i <= -1}")); }), ErrorCode::EmptyDomain);

  auto sat = effectively_saturated(parse_set(kStrip));
  EXPECT_EQ(sat, (std::vector<bool>{true, true, false, false}));
}

TEST(Polylib, SaturateProducesFaces) {
  auto sq = parse_set(kSquare);
  auto edge = saturate(sq, 0);
  EXPECT_EQ(edge.to_string(), "{[i,j] : i = 0 and i < N and 0 <= j and j < N}");
  EXPECT_EQ(dimension(edge), 1u);
  auto vertex = saturate(edge, 2);
  EXPECT_EQ(dimension(vertex), 0u);
  EXPECT_EQ(enumerate_points(vertex, 5), (std::vector<IntVector>{{0, 0}}));
  EXPECT_EQ(code_of([&] { saturate(edge, 0); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([&] { saturate(sq, 9); }), ErrorCode::OutOfRange);
}

TEST(Polylib, TranslateShiftsPoints) {
  auto tri = parse_set(kTriangle);
  IntVector rho = {1, 1};
  auto moved = translate(tri, rho);
  std::set<IntVector> expect;
  for (auto z : enumerate_points(tri, 5)) expect.insert({z[0] + 1, z[1] + 1});
  auto got = enumerate_points(moved, 5);
  EXPECT_EQ(std::set<IntVector>(got.begin(), got.end()), expect);
  IntVector zero = {0, 0};
  EXPECT_EQ(translate(tri, zero), tri);
  IntVector two = {1, 2};
  EXPECT_EQ(code_of([&] { translate(parse_set("{[i] : 0 <= i < N}"), two); }), ErrorCode::DimensionMismatch);
}

TEST(Polylib, EnumeratePoints) {
  EXPECT_EQ(enumerate_points(parse_set(kTriangle), 4).size(), 10u);
  EXPECT_EQ(enumerate_points(parse_set(kStrip), 7).size(), 70u);
  EXPECT_TRUE(enumerate_points(parse_set("{[i] : i >= 1 and i <= -1}"), 4).empty());
  auto pts = enumerate_points(parse_set(kTriangle), 3);
  EXPECT_TRUE(std::is_sorted(pts.begin(), pts.end()));
  EXPECT_EQ(code_of([] { enumerate_points(parse_set("{[i] : i >= 0}"), 4); }), ErrorCode::Unbounded);
}

TEST(Polylib, EnumerationMatchesBruteForce) {
  for (const char* text : {kTriangle, kSquare, kStrip, kTetra}) {
    auto p = parse_set(text);
    for (Int n : {0, 1, 4, 6}) {
      std::vector<IntVector> brute;
      std::vector<Int> z(p.dims(), 0);
      std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == p.dims()) {
          if (p.contains(z, n)) brute.push_back(z);
          return;
        }
        for (Int v = -2; v <= 12; ++v) {
          z[k] = v;
          rec(k + 1);
        }
      };
      rec(0);
      EXPECT_EQ(enumerate_points(p, n), brute) << text << " n=" << n;
    }
  }
}

TEST(Polylib, SmallestPointPicksNamedReuseVectors) {
  auto ra = parse_set("{[i,j,k] : k = 0 and -i = 0 and j > 0 and i - j < 0}");
  auto rb = parse_set("{[i,j,k] : k = 0 and -i < 0 and j > 0 and i - j < 0}");
  auto rl = parse_set("{[i,j,k] : k = 0 and -i > 0 and j > 0 and i - j < 0}");
  EXPECT_EQ(smallest_point(ra), (IntVector{0, 1, 0}));
  EXPECT_EQ(smallest_point(rb), (IntVector{1, 2, 0}));
  EXPECT_EQ(smallest_point(rl), (IntVector{-1, 1, 0}));
  EXPECT_FALSE(smallest_point(parse_set("{[i] : i > 0 and i < 0}")));
  EXPECT_EQ(code_of([] { smallest_point(parse_set("{[i] : i >= 100}")); }), ErrorCode::RadiusExhausted);
  for (const auto& p : {ra, rb, rl}) EXPECT_TRUE(p.contains(*smallest_point(p), kDefaultMinSize));
}

TEST(Polylib, RedundancyRemovalAndProjection) {
  auto tetra = parse_set(kTetra);
  auto slim = remove_redundant(tetra);
  EXPECT_EQ(slim.to_string(), "{[i,j,k] : i <= N and 0 <= j and j + k <= i and 0 <= k}");
  auto img = project(parse_set(kTriangle), {0});
  EXPECT_EQ(img.to_string(), "{[i] : 0 <= i and i < N}");
  auto implied = remove_redundant(parse_set("{[i,j] : 0 <= i < N and j >= 2 and j <= 2}"));
  EXPECT_EQ(implied.to_string(), "{[i,j] : 0 <= i and i < N and j = 2}");
}
