#pragma once

#include <optional>
#include <span>
#include <vector>

#include "swarm/voxel_grid.hpp"

namespace swarm {

struct Path {
  std::vector<Vec3> waypoints;

  double length() const;
};

// Number of straight, face-diagonal and cube-diagonal moves in a grid path.
// Comparing these exactly sidesteps floating ties between equal-cost paths.
struct MoveCounts {
  int straight = 0;
  int face_diag = 0;
  int cube_diag = 0;

  double cost(double voxel_size) const;
  bool operator==(const MoveCounts&) const = default;
};

struct GridPath {
  std::vector<Index3> cells;  // dense, each step a single 26-neighborhood move
  MoveCounts moves;
};

// Moves between 26-neighbors are allowed only when every cell of the
// 2x2(x2) block they span is free, so a path never squeezes through the
// shared edge or corner of two occupied voxels.
bool move_allowed(const VoxelGrid& grid, const Index3& from, const Index3& step);

MoveCounts count_moves(const std::vector<Index3>& cells);

// Plain A* over the 26-connected grid. Reference implementation for JPS.
std::optional<GridPath> astar_search(const VoxelGrid& grid, const Index3& start, const Index3& goal);

// Jump point search with neighbor pruning derived from the move model above.
std::optional<GridPath> jps_search(const VoxelGrid& grid, const Index3& start, const Index3& goal);

enum class PathStatus { Ok, NoPath, StartBlocked };

struct PathResult {
  PathStatus status = PathStatus::NoPath;
  Path path;
  GridPath grid_path;
};

// Shortest grid path between the voxels of start and goal, returned as
// voxel centers with the exact start and goal substituted at the ends.
PathResult find_path(const VoxelGrid& grid, const Vec3& start, const Vec3& goal);
PathResult find_path_astar(const VoxelGrid& grid, const Vec3& start, const Vec3& goal);

// Distance from p to the nearest Occupied voxel center, searching only
// within max_range. Returns +inf when nothing is that close.
double obstacle_clearance(const VoxelGrid& grid, const Vec3& p, double max_range);

// True when sampled points along the segment all fall in Free voxels.
bool segment_free(const VoxelGrid& grid, const Vec3& a, const Vec3& b);

struct PushAwayParams {
  double influence_radius = 0.9;
  double step_gain = 0.3;
  int sweeps = 5;
};

// Nudges interior waypoints away from nearby obstacles. A move is kept only
// if it lands in a Free voxel, does not reduce that waypoint's clearance,
// and leaves both adjacent segments free.
Path push_away(const VoxelGrid& grid, const Path& path, const PushAwayParams& params);

// prefix followed by new_path; new_path must begin at prefix's last point.
// Consecutive duplicates are dropped.
Path stitch(std::span<const Vec3> prefix, const Path& new_path);

}  // namespace swarm
