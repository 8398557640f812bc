#include "swarm/safe_corridor.hpp"

#include <algorithm>
#include <cmath>

namespace swarm {

namespace {

bool layer_free(const VoxelGrid& grid, Index3 lo, Index3 hi, int axis, int value) {
  if (value < 0 || value >= grid.counts()[axis]) return false;
  lo[axis] = hi[axis] = value;
  for (int z = lo[2]; z <= hi[2]; ++z)
    for (int y = lo[1]; y <= hi[1]; ++y)
      for (int x = lo[0]; x <= hi[0]; ++x)
        if (grid.at({x, y, z}) != Occupancy::Free) return false;
  return true;
}

}  // namespace

bool SafeCorridor::contains(const Vec3& p, double tol) const {
  return std::any_of(polyhedra.begin(), polyhedra.end(),
                     [&](const Polyhedron& poly) { return poly.contains(p, tol); });
}

void SafeCorridor::refresh_witnesses() {
  witnesses.clear();
  for (std::size_t i = 0; i + 1 < polyhedra.size(); ++i) {
    const auto& a = polyhedra[i].box;
    const auto& b = polyhedra[i + 1].box;
    std::optional<Vec3> w;
    if (a && b) {
      Vec3 lo = a->min.cwiseMax(b->min), hi = a->max.cwiseMin(b->max);
      if ((lo.array() <= hi.array()).all()) w = 0.5 * (lo + hi);
    }
    witnesses.push_back(w);
  }
}

Polyhedron gen_polyhedron(const VoxelGrid& grid, const Index3& seed_voxel) {
  if (!grid.is_free(seed_voxel)) throw ContractError("gen_polyhedron: seed voxel is not free");
  Index3 lo = seed_voxel, hi = seed_voxel;
  bool open[6] = {true, true, true, true, true, true};
  bool any_open = true;
  while (any_open) {
    any_open = false;
    for (int face = 0; face < 6; ++face) {
      if (!open[face]) continue;
      const int axis = face / 2;
      const bool up = face % 2 == 0;
      const int next = up ? hi[axis] + 1 : lo[axis] - 1;
      if (layer_free(grid, lo, hi, axis, next)) {
        (up ? hi : lo)[axis] = next;
        any_open = true;
      } else {
        open[face] = false;
      }
    }
  }
  const double v = grid.voxel_size();
  AlignedBox box{grid.origin() + v * Vec3(lo[0], lo[1], lo[2]),
                 grid.origin() + v * Vec3(hi[0] + 1, hi[1] + 1, hi[2] + 1)};
  return Polyhedron::from_box(box, grid.center_of(seed_voxel));
}

std::vector<Vec3> sample_path(const Path& path, double step) {
  std::vector<Vec3> out;
  const auto& w = path.waypoints;
  if (w.empty()) return out;
  out.push_back(w.front());
  double carried = 0.0;  // arc length since the last emitted sample
  for (std::size_t i = 1; i < w.size(); ++i) {
    const Vec3 seg = w[i] - w[i - 1];
    const double len = seg.norm();
    double s = step - carried;
    while (s <= len + 1e-12) {
      out.push_back(w[i - 1] + seg * (s / len));
      s += step;
    }
    carried = len - (s - step);
  }
  if ((out.back() - w.back()).norm() > 1e-9) out.push_back(w.back());
  else out.back() = w.back();
  return out;
}

SafeCorridor update_corridor(const SafeCorridor& prev, std::span<const Vec3> traj_points,
                             const Path& global_path, const VoxelGrid& grid, int P_hor) {
  if (P_hor < 1) throw ContractError("update_corridor: P_hor must be >= 1");
  std::vector<Polyhedron> held;
  for (const auto& poly : prev.polyhedra)
    if (std::any_of(traj_points.begin(), traj_points.end(), [&](const Vec3& p) { return poly.contains(p); }))
      held.push_back(poly);
  // A cell whose trajectory points all sit in its successor adds nothing and
  // would only crowd out cells further along the path.
  SafeCorridor out;
  for (std::size_t i = 0; i < held.size(); ++i) {
    if (static_cast<int>(out.size()) == P_hor) break;
    const bool redundant = i + 1 < held.size() && std::all_of(traj_points.begin(), traj_points.end(), [&](const Vec3& p) {
                             return !held[i].contains(p) || held[i + 1].contains(p);
                           });
    if (!redundant) out.polyhedra.push_back(held[i]);
  }
  for (const Vec3& sample : sample_path(global_path, grid.voxel_size())) {
    if (static_cast<int>(out.size()) >= P_hor) break;
    if (out.contains(sample)) continue;
    const Index3 seed = grid.index_of(sample);
    if (!grid.is_free(seed)) continue;
    out.polyhedra.push_back(gen_polyhedron(grid, seed));
  }
  out.refresh_witnesses();
  return out;
}

}  // namespace swarm
