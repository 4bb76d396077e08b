#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "redsimpl/polyhedron.hpp"

namespace redsimpl {

/// A face of a root polyhedron. `saturation` lists every root constraint that
/// is tight on the face, including thick pairs; `geometry` is the root with
/// the explicitly saturated constraints turned into equalities.
struct Face {
  std::vector<std::size_t> saturation;
  ParamPolyhedron geometry;
  std::size_t dim = 0;

  bool operator==(const Face& o) const { return saturation == o.saturation; }
};

struct FaceEdge {
  std::size_t parent = 0;
  std::size_t child = 0;
  std::size_t added = 0;  // root constraint saturated to reach the child
};

namespace detail {

inline std::vector<std::size_t> tight_constraints(const ParamPolyhedron& geom, Int min_size) {
  auto sat = effectively_saturated(geom, min_size);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < sat.size(); ++i)
    if (sat[i]) out.push_back(i);
  return out;
}

inline Face make_face(ParamPolyhedron geom, Int min_size) {
  Face f;
  f.saturation = tight_constraints(geom, min_size);
  f.dim = dimension(geom, min_size);
  f.geometry = std::move(geom);
  return f;
}

}  // namespace detail

/// Facets of a face paired with the root constraint each one saturates.
inline std::vector<std::pair<Face, std::size_t>> child_facets(const Face& f, Int min_size = kDefaultMinSize) {
  std::vector<std::pair<Face, std::size_t>> out;
  if (f.dim == 0) return out;
  for (std::size_t c = 0; c < f.geometry.size(); ++c) {
    if (std::binary_search(f.saturation.begin(), f.saturation.end(), c)) continue;
    auto geom = saturate(f.geometry, c);
    if (is_empty(geom, min_size)) continue;
    Face child = detail::make_face(std::move(geom), min_size);
    if (child.dim + 1 != f.dim) continue;
    bool dup = std::any_of(out.begin(), out.end(), [&](const auto& e) { return e.first == child; });
    if (!dup) out.emplace_back(std::move(child), c);
  }
  return out;
}

/// The root face: the polyhedron with its thick and implied equalities marked.
inline Face root_face(const ParamPolyhedron& p, Int min_size = kDefaultMinSize) {
  if (is_empty(p, min_size)) fail(ErrorCode::EmptyDomain, "face lattice of empty polyhedron " + p.to_string());
  return detail::make_face(p, min_size);
}

class FaceLattice {
 public:
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<FaceEdge>& edges() const { return edges_; }
  const Face& root() const { return faces_.front(); }

  /// Face indices grouped by dimension, highest first.
  std::vector<std::vector<std::size_t>> levels() const {
    std::map<std::size_t, std::vector<std::size_t>, std::greater<>> by_dim;
    for (std::size_t i = 0; i < faces_.size(); ++i) by_dim[faces_[i].dim].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [d, ids] : by_dim) out.push_back(ids);
    return out;
  }

  std::size_t index_of(const Face& f) const {
    for (std::size_t i = 0; i < faces_.size(); ++i)
      if (faces_[i] == f) return i;
    fail(ErrorCode::NotInLattice, "face is not part of this lattice");
  }

  std::vector<Face> facets(const Face& f) const {
    std::size_t id = index_of(f);
    std::vector<Face> out;
    for (const auto& e : edges_)
      if (e.parent == id) out.push_back(faces_[e.child]);
    return out;
  }

  /// Index-coefficient part of the inward normal of the constraint that
  /// separates `f` from its parent.
  IntVector facet_normal(const Face& f, const Face& parent) const {
    std::size_t c = index_of(f), p = index_of(parent);
    for (const auto& e : edges_)
      if (e.parent == p && e.child == c) return root().geometry.constraints()[e.added].form.coeffs;
    fail(ErrorCode::NotAChild, "face is not an immediate facet of the given parent");
  }

  friend FaceLattice build_face_lattice(const ParamPolyhedron& p, Int min_size);

 private:
  std::vector<Face> faces_;
  std::vector<FaceEdge> edges_;
};

inline FaceLattice build_face_lattice(const ParamPolyhedron& p, Int min_size = kDefaultMinSize) {
  FaceLattice lat;
  lat.faces_.push_back(root_face(p, min_size));
  for (std::size_t next = 0; next < lat.faces_.size(); ++next) {
    auto children = child_facets(lat.faces_[next], min_size);
    for (auto& [child, added] : children) {
      std::size_t id = lat.faces_.size();
      for (std::size_t k = 0; k < lat.faces_.size(); ++k)
        if (lat.faces_[k] == child) id = k;
      if (id == lat.faces_.size()) lat.faces_.push_back(child);
      lat.edges_.push_back(FaceEdge{next, id, added});
    }
  }
  return lat;
}

}  // namespace redsimpl
