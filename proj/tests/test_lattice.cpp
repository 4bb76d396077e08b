#include <gtest/gtest.h>

#include "redsimpl/lattice.hpp"
#include "redsimpl/set_text.hpp"

using namespace redsimpl;

namespace {

std::vector<std::size_t> level_sizes(const FaceLattice& l) {
  std::vector<std::size_t> out;
  for (const auto& lvl : l.levels()) out.push_back(lvl.size());
  return out;
}

}  // namespace

TEST(Lattice, SquareHasNineFaces) {
  auto l = build_face_lattice(parse_set("{[i,j] : 0 <= i and i < N and 0 <= j and j < N}"));
  EXPECT_EQ(l.faces().size(), 9u);
  EXPECT_EQ(level_sizes(l), (std::vector<std::size_t>{1, 4, 4}));
  EXPECT_EQ(l.facets(l.root()).size(), 4u);
  for (const auto& e : l.edges()) EXPECT_EQ(l.faces()[e.parent].dim, l.faces()[e.child].dim + 1);
}

TEST(Lattice, ThickSegmentHasTwoVertices) {
  auto l = build_face_lattice(parse_set("{[i,j] : 0 <= i and i < 10 and 0 <= j and j < N}"));
  EXPECT_EQ(l.root().dim, 1u);
  EXPECT_EQ(l.root().saturation, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(level_sizes(l), (std::vector<std::size_t>{1, 2}));
}

TEST(Lattice, TetrahedronHasFourTwoFaces) {
  auto tetra = remove_redundant(parse_set("{[i,j,k] : 0 <= i and i <= N and 0 <= j and k <= i - j and 0 <= k}"));
  auto l = build_face_lattice(tetra);
  EXPECT_EQ(level_sizes(l), (std::vector<std::size_t>{1, 4, 6, 4}));
  auto facets = l.facets(l.root());
  ASSERT_EQ(facets.size(), 4u);
  IntVector k_normal = {0, 0, 1};
  bool found = false;
  for (const auto& f : facets) found |= l.facet_normal(f, l.root()) == k_normal;
  EXPECT_TRUE(found);
}

TEST(Lattice, TriangleFacetsAndNormals) {
  auto l = build_face_lattice(parse_set("{[i,j] : 0 <= j and j <= i and i < N}"));
  auto facets = l.facets(l.root());
  ASSERT_EQ(facets.size(), 3u);
  EXPECT_EQ(l.facet_normal(facets[0], l.root()), (IntVector{0, 1}));
  EXPECT_EQ(l.facet_normal(facets[1], l.root()), (IntVector{1, -1}));
  EXPECT_EQ(dot(l.facet_normal(facets[1], l.root()), IntVector{1, 1}), 0);
  EXPECT_EQ(dot(l.facet_normal(facets[0], l.root()), IntVector{1, 1}), 1);

  const Face& vertex = l.faces().back();
  EXPECT_EQ(vertex.dim, 0u);
  EXPECT_TRUE(l.facets(vertex).empty());
  try {
    l.facet_normal(vertex, l.root());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAChild);
  }
  Face stranger;
  stranger.saturation = {7};
  try {
    l.facets(stranger);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInLattice);
  }
}
