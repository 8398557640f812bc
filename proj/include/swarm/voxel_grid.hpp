#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm {

enum class Occupancy : std::uint8_t { Free = 0, Occupied = 1 };

// Dense occupancy grid. The origin is the min corner of voxel (0,0,0).
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin, const Index3& counts, double voxel_size);

  const Vec3& origin() const { return origin_; }
  const Index3& counts() const { return counts_; }
  double voxel_size() const { return voxel_size_; }
  std::size_t size() const { return cells_.size(); }
  AlignedBox extent() const;

  bool in_bounds(const Index3& idx) const {
    return idx[0] >= 0 && idx[1] >= 0 && idx[2] >= 0 &&
           idx[0] < counts_[0] && idx[1] < counts_[1] && idx[2] < counts_[2];
  }
  bool contains_point(const Vec3& p) const;

  // Floor-based lookup; may return an out-of-bounds index.
  Index3 index_of(const Vec3& p) const;
  Vec3 center_of(const Index3& idx) const;

  std::size_t linear(const Index3& idx) const {
    return (static_cast<std::size_t>(idx[2]) * counts_[1] + idx[1]) * counts_[0] + idx[0];
  }
  Index3 unlinear(std::size_t i) const;

  Occupancy at(const Index3& idx) const {
    return static_cast<Occupancy>(cells_[linear(idx)]);
  }
  void set(const Index3& idx, Occupancy o) {
    if (!in_bounds(idx)) throw ContractError("VoxelGrid::set: index out of bounds");
    cells_[linear(idx)] = static_cast<std::uint8_t>(o);
  }
  // Out-of-bounds cells count as not free.
  bool is_free(const Index3& idx) const {
    return in_bounds(idx) && cells_[linear(idx)] == 0;
  }
  std::size_t count_occupied() const;

  bool operator==(const VoxelGrid& o) const = default;

 private:
  Vec3 origin_ = Vec3::Zero();
  Index3 counts_{1, 1, 1};
  double voxel_size_ = 1.0;
  std::vector<std::uint8_t> cells_ = std::vector<std::uint8_t>(1, 0);
};

struct WorldModel {
  std::vector<AlignedBox> obstacles;
  AlignedBox bounds{Vec3::Constant(-1e6), Vec3::Constant(1e6)};
};

// Number of voxels along an axis for a given extent (rounded, at least 1).
int voxel_count(double extent, double voxel_size);

// Grid of the given extent whose center voxel contains `center`. The origin
// sits on the voxel_size lattice so grids built around different centers
// line up. Voxels overlapping an obstacle are Occupied, as are voxels whose
// center lies outside the world bounds.
VoxelGrid rasterize(const WorldModel& world, const Vec3& center,
                    const Vec3& extent, double voxel_size);

// Marks every voxel whose center is within `radius` of an Occupied center.
VoxelGrid inflate(const VoxelGrid& grid, double radius);

// Returns goal if it lies in the grid, otherwise the center of the border
// voxel where the segment agent_pos -> goal leaves the grid.
Vec3 intermediate_goal(const VoxelGrid& grid, const Vec3& agent_pos, const Vec3& goal);

VoxelGrid clear_borders(const VoxelGrid& grid);

}  // namespace swarm
