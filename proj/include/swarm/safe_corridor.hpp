#pragma once

#include <optional>
#include <span>
#include <vector>

#include "swarm/global_path.hpp"
#include "swarm/voxel_grid.hpp"

namespace swarm {

struct SafeCorridor {
  std::vector<Polyhedron> polyhedra;
  // witnesses[i] is a point shared by polyhedra i and i+1, when one exists.
  std::vector<std::optional<Vec3>> witnesses;

  std::size_t size() const { return polyhedra.size(); }
  bool contains(const Vec3& p, double tol = 1e-9) const;
  void refresh_witnesses();
};

// Axis-aligned box grown from the seed voxel one layer at a time, cycling
// through +x, -x, +y, -y, +z, -z. A face stops for good once its next layer
// would leave the grid or touch an Occupied voxel.
Polyhedron gen_polyhedron(const VoxelGrid& grid, const Index3& seed_voxel);

// Points of `path` at arc-length spacing `step`, final point included.
std::vector<Vec3> sample_path(const Path& path, double step);

// Keeps the previous polyhedra that still hold a trajectory point, except
// those whose points all lie in the next kept one, then seeds new ones from
// the first path samples not yet covered until the corridor holds P_hor
// cells or the path runs out.
SafeCorridor update_corridor(const SafeCorridor& prev, std::span<const Vec3> traj_points,
                             const Path& global_path, const VoxelGrid& grid, int P_hor);

}  // namespace swarm
