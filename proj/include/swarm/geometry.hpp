#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace swarm {

using Vec3 = Eigen::Vector3d;
using Index3 = std::array<int, 3>;
using AgentId = int;

// Broken preconditions. Expected failures (no path, infeasible QP) are
// reported through return values instead.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct AlignedBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p, double tol = 0.0) const {
    return (p.array() >= min.array() - tol).all() &&
           (p.array() <= max.array() + tol).all();
  }
  // Open-interior overlap; boxes that only touch on a face do not overlap.
  bool overlaps(const AlignedBox& o) const {
    return (min.array() < o.max.array()).all() &&
           (o.min.array() < max.array()).all();
  }
  Vec3 center() const { return 0.5 * (min + max); }
};

// Point x is inside iff normal . x <= offset.
struct Halfspace {
  Vec3 normal = Vec3::UnitX();
  double offset = 0.0;

  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
  bool contains(const Vec3& p, double tol = 1e-9) const {
    return signed_distance(p) <= tol;
  }
};

struct Polyhedron {
  std::vector<Halfspace> halfspaces;
  Vec3 seed = Vec3::Zero();
  // Set when the cell came from box growth; lets the branch-and-bound
  // relaxation use a cheap bounding box instead of the halfspace list.
  std::optional<AlignedBox> box;

  bool contains(const Vec3& p, double tol = 1e-9) const {
    for (const auto& h : halfspaces)
      if (!h.contains(p, tol)) return false;
    return true;
  }

  static Polyhedron from_box(const AlignedBox& b, const Vec3& seed);
};

inline Polyhedron Polyhedron::from_box(const AlignedBox& b, const Vec3& seed) {
  Polyhedron poly;
  poly.seed = seed;
  poly.box = b;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 n = Vec3::Zero();
    n[axis] = 1.0;
    poly.halfspaces.push_back({n, b.max[axis]});
    poly.halfspaces.push_back({-n, -b.min[axis]});
  }
  return poly;
}

}  // namespace swarm
