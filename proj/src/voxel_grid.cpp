#include "swarm/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace swarm {

VoxelGrid::VoxelGrid(const Vec3& origin, const Index3& counts, double voxel_size)
    : origin_(origin), counts_(counts), voxel_size_(voxel_size) {
  if (voxel_size <= 0.0) throw ContractError("voxel_size must be positive");
  for (int c : counts)
    if (c < 1) throw ContractError("voxel counts must be >= 1");
  cells_.assign(static_cast<std::size_t>(counts[0]) * counts[1] * counts[2], 0);
}

AlignedBox VoxelGrid::extent() const {
  Vec3 span(counts_[0], counts_[1], counts_[2]);
  return {origin_, origin_ + voxel_size_ * span};
}

bool VoxelGrid::contains_point(const Vec3& p) const {
  return in_bounds(index_of(p));
}

Index3 VoxelGrid::index_of(const Vec3& p) const {
  Index3 idx;
  for (int a = 0; a < 3; ++a)
    idx[a] = static_cast<int>(std::floor((p[a] - origin_[a]) / voxel_size_));
  return idx;
}

Vec3 VoxelGrid::center_of(const Index3& idx) const {
  return origin_ + voxel_size_ * Vec3(idx[0] + 0.5, idx[1] + 0.5, idx[2] + 0.5);
}

Index3 VoxelGrid::unlinear(std::size_t i) const {
  Index3 idx;
  idx[0] = static_cast<int>(i % counts_[0]);
  i /= counts_[0];
  idx[1] = static_cast<int>(i % counts_[1]);
  idx[2] = static_cast<int>(i / counts_[1]);
  return idx;
}

std::size_t VoxelGrid::count_occupied() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

int voxel_count(double extent, double voxel_size) {
  return std::max(1, static_cast<int>(std::lround(extent / voxel_size)));
}

VoxelGrid rasterize(const WorldModel& world, const Vec3& center,
                    const Vec3& extent, double voxel_size) {
  if (voxel_size <= 0.0 || (extent.array() <= 0.0).any())
    throw ContractError("rasterize: extent and voxel size must be positive");
  Index3 counts;
  Vec3 origin;
  for (int a = 0; a < 3; ++a) {
    counts[a] = voxel_count(extent[a], voxel_size);
    double cell = std::floor(center[a] / voxel_size);
    origin[a] = (cell - counts[a] / 2) * voxel_size;
  }
  VoxelGrid grid(origin, counts, voxel_size);

  // Obstacles touch a voxel when their open interiors intersect.
  for (const auto& box : world.obstacles) {
    Index3 lo, hi;
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, static_cast<int>(std::floor((box.min[a] - origin[a]) / voxel_size)));
      hi[a] = std::min(counts[a] - 1,
                       static_cast<int>(std::ceil((box.max[a] - origin[a]) / voxel_size)) - 1);
    }
    for (int z = lo[2]; z <= hi[2]; ++z)
      for (int y = lo[1]; y <= hi[1]; ++y)
        for (int x = lo[0]; x <= hi[0]; ++x) {
          Index3 idx{x, y, z};
          Vec3 c = grid.center_of(idx);
          // Shrunk slightly so a box flush with a voxel face does not leak
          // into the neighbor through rounding.
          const double half = 0.5 * voxel_size - 1e-9;
          AlignedBox cell{c.array() - half, c.array() + half};
          if (cell.overlaps(box)) grid.set(idx, Occupancy::Occupied);
        }
  }

  for (std::size_t i = 0; i < grid.size(); ++i) {
    Index3 idx = grid.unlinear(i);
    if (!world.bounds.contains(grid.center_of(idx))) grid.set(idx, Occupancy::Occupied);
  }
  return grid;
}

VoxelGrid inflate(const VoxelGrid& grid, double radius) {
  if (radius < 0.0) throw ContractError("inflate: negative radius");
  const double r_cells = radius / grid.voxel_size();
  const int reach = static_cast<int>(std::floor(r_cells + 1e-9));
  if (reach == 0) return grid;

  std::vector<Index3> stencil;
  const double r2 = r_cells * r_cells + 1e-9;
  for (int dz = -reach; dz <= reach; ++dz)
    for (int dy = -reach; dy <= reach; ++dy)
      for (int dx = -reach; dx <= reach; ++dx)
        if (dx * dx + dy * dy + dz * dz <= r2) stencil.push_back({dx, dy, dz});

  VoxelGrid out = grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Index3 idx = grid.unlinear(i);
    if (grid.at(idx) != Occupancy::Occupied) continue;
    for (const auto& d : stencil) {
      Index3 n{idx[0] + d[0], idx[1] + d[1], idx[2] + d[2]};
      if (out.in_bounds(n)) out.set(n, Occupancy::Occupied);
    }
  }
  return out;
}

Vec3 intermediate_goal(const VoxelGrid& grid, const Vec3& agent_pos, const Vec3& goal) {
  if (grid.contains_point(goal)) return goal;
  const AlignedBox box = grid.extent();
  const Vec3 dir = goal - agent_pos;
  // Slab exit parameter of the ray from an interior point.
  double t_exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0.0) t_exit = std::min(t_exit, (box.max[a] - agent_pos[a]) / dir[a]);
    else if (dir[a] < 0.0) t_exit = std::min(t_exit, (box.min[a] - agent_pos[a]) / dir[a]);
  }
  t_exit = std::clamp(t_exit, 0.0, 1.0);
  Index3 idx = grid.index_of(agent_pos + t_exit * dir);
  for (int a = 0; a < 3; ++a) idx[a] = std::clamp(idx[a], 0, grid.counts()[a] - 1);
  return grid.center_of(idx);
}

VoxelGrid clear_borders(const VoxelGrid& grid) {
  VoxelGrid out = grid;
  const Index3& n = grid.counts();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Index3 idx = grid.unlinear(i);
    for (int a = 0; a < 3; ++a) {
      if (idx[a] == 0 || idx[a] == n[a] - 1) {
        out.set(idx, Occupancy::Free);
        break;
      }
    }
  }
  return out;
}

}  // namespace swarm
