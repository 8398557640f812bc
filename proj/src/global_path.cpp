#include "swarm/global_path.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>

namespace swarm {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt3 = 1.7320508075688772;

using Mask = unsigned __int128;

constexpr int kNone = 13;  // direction id of the zero vector

int dir_id(int dx, int dy, int dz) { return (dz + 1) * 9 + (dy + 1) * 3 + (dx + 1); }
Index3 dir_vec(int id) { return {id % 3 - 1, (id / 3) % 3 - 1, id / 9 - 1}; }
int nonzeros(const Index3& d) { return (d[0] != 0) + (d[1] != 0) + (d[2] != 0); }
double step_len(const Index3& d) {
  static constexpr double len[4] = {0.0, 1.0, kSqrt2, kSqrt3};
  return len[nonzeros(d)];
}
Index3 add(const Index3& a, const Index3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

// Nonzero vectors obtained by zeroing some components of d (d included).
std::vector<Index3> sub_vectors(const Index3& d) {
  std::vector<Index3> out;
  for (int bits = 1; bits < 8; ++bits) {
    Index3 s{0, 0, 0};
    bool ok = true;
    for (int a = 0; a < 3; ++a) {
      if (bits & (1 << a)) {
        if (d[a] == 0) ok = false;
        s[a] = d[a];
      }
    }
    if (ok) out.push_back(s);
  }
  return out;
}

int block_bit(const Index3& o) { return (o[2] + 2) * 25 + (o[1] + 2) * 5 + (o[0] + 2); }
bool in_block(const Index3& o) {
  return std::abs(o[0]) <= 2 && std::abs(o[1]) <= 2 && std::abs(o[2]) <= 2;
}
Mask bit(const Index3& o) { return Mask{1} << block_bit(o); }

double octile_offset(const Index3& a, const Index3& b) {
  std::array<int, 3> d{std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])};
  std::sort(d.begin(), d.end());
  return kSqrt3 * d[0] + kSqrt2 * (d[1] - d[0]) + (d[2] - d[1]);
}

// Pruning tables over the 5x5x5 block around the node being expanded. A
// neighbor n of x (reached from p = x - d) is pruned when some path from p
// to n that avoids x is no longer than the path through x (strictly
// shorter when d is diagonal). Each such detour is stored as the set of
// cells it needs free.
struct JpsTables {
  std::array<Mask, 27> move_req{};
  std::array<std::array<std::vector<Mask>, 27>, 27> detours;
  std::array<Mask, 27> relevant{};
  std::array<std::vector<Index3>, 27> relevant_cells;
  std::array<std::uint32_t, 27> natural{};
  std::array<std::vector<int>, 27> sub_dirs;  // proper sub-directions

  JpsTables() {
    for (int m = 0; m < 27; ++m) {
      if (m == kNone) continue;
      for (const auto& s : sub_vectors(dir_vec(m))) move_req[m] |= bit(s);
      for (const auto& s : sub_vectors(dir_vec(m)))
        if (s != dir_vec(m)) sub_dirs[m].push_back(dir_id(s[0], s[1], s[2]));
    }
    for (int d = 0; d < 27; ++d) {
      if (d == kNone) continue;
      const Index3 dv = dir_vec(d);
      const Index3 p{-dv[0], -dv[1], -dv[2]};
      const bool strict = nonzeros(dv) > 1;
      for (int m = 0; m < 27; ++m) {
        if (m == kNone) continue;
        const double via = step_len(dv) + step_len(dir_vec(m));
        auto& list = detours[d][m];
        std::vector<Index3> visited{p};
        search(p, dir_vec(m), 0.0, via, strict, bit(p), visited, list);
        minimize(list);
      }
    }
    for (int d = 0; d < 27; ++d) {
      Mask rel = 0;
      for (int m = 0; m < 27; ++m) {
        if (m == kNone) continue;
        rel |= move_req[m];
        if (d != kNone)
          for (Mask alt : detours[d][m]) rel |= alt;
      }
      relevant[d] = rel;
      for (int b = 0; b < 125; ++b)
        if ((rel >> b) & 1) relevant_cells[d].push_back({b % 5 - 2, (b / 5) % 5 - 2, b / 25 - 2});
      natural[d] = successors(d, rel);
    }
  }

  void search(const Index3& u, const Index3& target, double cost, double via, bool strict,
              Mask need, std::vector<Index3>& visited, std::vector<Mask>& out) {
    if (u == target) {
      bool ok = strict ? cost < via - 1e-9 : cost <= via + 1e-9;
      if (ok) out.push_back(need);
      return;
    }
    for (int m = 0; m < 27; ++m) {
      if (m == kNone) continue;
      const Index3 s = dir_vec(m);
      const double c = cost + step_len(s);
      if (c > via + 1e-9) continue;
      const Index3 v = add(u, s);
      if (v == Index3{0, 0, 0} || !in_block(v)) continue;
      if (c + octile_offset(v, target) > via + 1e-9) continue;
      if (std::find(visited.begin(), visited.end(), v) != visited.end()) continue;
      Mask req = 0;
      bool inside = true;
      for (const auto& sv : sub_vectors(s)) {
        Index3 cell = add(u, sv);
        if (!in_block(cell)) inside = false;
        else if (cell != Index3{0, 0, 0}) req |= bit(cell);
      }
      if (!inside) continue;
      visited.push_back(v);
      search(v, target, c, via, strict, need | req, visited, out);
      visited.pop_back();
    }
  }

  static void minimize(std::vector<Mask>& list) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    std::vector<Mask> kept;
    for (Mask a : list) {
      bool dominated = false;
      for (Mask b : list)
        if (b != a && (b & a) == b) { dominated = true; break; }
      if (!dominated) kept.push_back(a);
    }
    list.swap(kept);
  }

  // Bitset over direction ids of the successors kept when `free` marks
  // which block cells are free.
  std::uint32_t successors(int d, Mask free) const {
    std::uint32_t out = 0;
    for (int m = 0; m < 27; ++m) {
      if (m == kNone) continue;
      if ((move_req[m] & ~free) != 0) continue;
      bool pruned = false;
      if (d != kNone) {
        for (Mask alt : detours[d][m])
          if ((alt & ~free) == 0) { pruned = true; break; }
      }
      if (!pruned) out |= 1u << m;
    }
    return out;
  }
};

const JpsTables& tables() {
  static const JpsTables t;
  return t;
}

double octile(const Index3& a, const Index3& b) { return octile_offset(a, b); }

struct OpenEntry {
  double f;
  double g;
  std::size_t cell;
  bool operator>(const OpenEntry& o) const {
    if (f != o.f) return f > o.f;
    if (g != o.g) return g < o.g;
    return cell > o.cell;
  }
};
using OpenList = std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>>;

constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

GridPath make_grid_path(const VoxelGrid& grid, const std::vector<std::size_t>& parent,
                        std::size_t goal) {
  std::vector<Index3> sparse;
  for (std::size_t c = goal; c != kNoParent; c = parent[c]) sparse.push_back(grid.unlinear(c));
  std::reverse(sparse.begin(), sparse.end());
  GridPath out;
  out.cells.push_back(sparse.front());
  for (std::size_t i = 1; i < sparse.size(); ++i) {
    Index3 cur = sparse[i - 1];
    const Index3& next = sparse[i];
    Index3 step;
    for (int a = 0; a < 3; ++a) step[a] = (next[a] > cur[a]) - (next[a] < cur[a]);
    while (cur != next) {
      cur = add(cur, step);
      out.cells.push_back(cur);
    }
  }
  out.moves = count_moves(out.cells);
  return out;
}

// Shared scaffolding for both searches; `expand` pushes successors.
template <typename Expand>
std::optional<GridPath> best_first(const VoxelGrid& grid, const Index3& start, const Index3& goal,
                                   Expand&& expand) {
  if (!grid.is_free(start) || !grid.is_free(goal)) return std::nullopt;
  const std::size_t n = grid.size();
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, kNoParent);
  std::vector<std::uint8_t> arrival(n, kNone);
  std::vector<std::uint8_t> closed(n, 0);
  OpenList open;
  const std::size_t s = grid.linear(start), t = grid.linear(goal);
  g[s] = 0.0;
  open.push({octile(start, goal), 0.0, s});

  auto relax = [&](std::size_t from, const Index3& to, double cost, int dir) {
    const std::size_t c = grid.linear(to);
    const double ng = g[from] + cost;
    if (closed[c] || ng >= g[c]) return;
    g[c] = ng;
    parent[c] = from;
    arrival[c] = static_cast<std::uint8_t>(dir);
    open.push({ng + octile(to, goal), ng, c});
  };

  while (!open.empty()) {
    OpenEntry top = open.top();
    open.pop();
    if (closed[top.cell] || top.g > g[top.cell]) continue;
    closed[top.cell] = 1;
    if (top.cell == t) return make_grid_path(grid, parent, t);
    expand(top.cell, grid.unlinear(top.cell), static_cast<int>(arrival[top.cell]), relax);
  }
  return std::nullopt;
}

Mask free_mask(const VoxelGrid& grid, const Index3& x, int d) {
  const auto& t = tables();
  Mask free = 0;
  for (const auto& o : t.relevant_cells[d])
    if (grid.is_free(add(x, o))) free |= bit(o);
  return free;
}

class Jumper {
 public:
  Jumper(const VoxelGrid& grid, const Index3& goal) : grid_(grid), goal_(goal) {}

  // Walks from x along d; returns the first jump point and the step count.
  std::optional<std::pair<Index3, int>> jump(Index3 x, int d) const {
    const auto& t = tables();
    const Index3 dv = dir_vec(d);
    int steps = 0;
    while (true) {
      if (!move_allowed(grid_, x, dv)) return std::nullopt;
      x = add(x, dv);
      ++steps;
      if (x == goal_ || has_forced(x, d)) return std::make_pair(x, steps);
      for (int s : t.sub_dirs[d])
        if (jump(x, s)) return std::make_pair(x, steps);
    }
  }

  bool has_forced(const Index3& x, int d) const {
    const auto& t = tables();
    const Mask free = free_mask(grid_, x, d);
    if ((t.relevant[d] & ~free) == 0) return false;
    return (t.successors(d, free) & ~t.natural[d]) != 0;
  }

 private:
  const VoxelGrid& grid_;
  Index3 goal_;
};

Path to_waypoints(const VoxelGrid& grid, const GridPath& gp, const Vec3& start, const Vec3& goal) {
  Path path;
  if (gp.cells.size() == 1) {
    path.waypoints.push_back(start);
    if (goal != start) path.waypoints.push_back(goal);
    return path;
  }
  for (const auto& c : gp.cells) path.waypoints.push_back(grid.center_of(c));
  path.waypoints.front() = start;
  path.waypoints.back() = goal;
  return path;
}

PathResult run_search(const VoxelGrid& grid, const Vec3& start, const Vec3& goal, bool jps) {
  PathResult out;
  const Index3 s = grid.index_of(start), g = grid.index_of(goal);
  if (!grid.is_free(s)) {
    out.status = PathStatus::StartBlocked;
    return out;
  }
  auto gp = jps ? jps_search(grid, s, g) : astar_search(grid, s, g);
  if (!gp) {
    out.status = PathStatus::NoPath;
    return out;
  }
  out.status = PathStatus::Ok;
  out.path = to_waypoints(grid, *gp, start, goal);
  out.grid_path = std::move(*gp);
  return out;
}

struct Nearest {
  double dist = std::numeric_limits<double>::infinity();
  Vec3 point = Vec3::Zero();
};

Nearest nearest_occupied(const VoxelGrid& grid, const Vec3& p, double max_range) {
  Nearest best;
  const Index3 c = grid.index_of(p);
  const int reach = static_cast<int>(std::ceil(max_range / grid.voxel_size())) + 1;
  const Index3& n = grid.counts();
  for (int z = std::max(0, c[2] - reach); z <= std::min(n[2] - 1, c[2] + reach); ++z)
    for (int y = std::max(0, c[1] - reach); y <= std::min(n[1] - 1, c[1] + reach); ++y)
      for (int x = std::max(0, c[0] - reach); x <= std::min(n[0] - 1, c[0] + reach); ++x) {
        Index3 idx{x, y, z};
        if (grid.at(idx) != Occupancy::Occupied) continue;
        Vec3 q = grid.center_of(idx);
        double d = (p - q).norm();
        if (d < best.dist && d <= max_range) best = {d, q};
      }
  return best;
}

}  // namespace

double Path::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) len += (waypoints[i] - waypoints[i - 1]).norm();
  return len;
}

double MoveCounts::cost(double voxel_size) const {
  return voxel_size * (straight + kSqrt2 * face_diag + kSqrt3 * cube_diag);
}

bool move_allowed(const VoxelGrid& grid, const Index3& from, const Index3& step) {
  for (const auto& s : sub_vectors(step))
    if (!grid.is_free(add(from, s))) return false;
  return true;
}

MoveCounts count_moves(const std::vector<Index3>& cells) {
  MoveCounts mc;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    Index3 d{cells[i][0] - cells[i - 1][0], cells[i][1] - cells[i - 1][1], cells[i][2] - cells[i - 1][2]};
    switch (nonzeros(d)) {
      case 1: ++mc.straight; break;
      case 2: ++mc.face_diag; break;
      case 3: ++mc.cube_diag; break;
      default: throw ContractError("count_moves: cells are not 26-neighbors");
    }
  }
  return mc;
}

std::optional<GridPath> astar_search(const VoxelGrid& grid, const Index3& start, const Index3& goal) {
  return best_first(grid, start, goal, [&](std::size_t cell, const Index3& x, int, auto& relax) {
    for (int m = 0; m < 27; ++m) {
      if (m == kNone) continue;
      const Index3 dv = dir_vec(m);
      if (move_allowed(grid, x, dv)) relax(cell, add(x, dv), step_len(dv), m);
    }
  });
}

std::optional<GridPath> jps_search(const VoxelGrid& grid, const Index3& start, const Index3& goal) {
  const auto& t = tables();
  Jumper jumper(grid, goal);
  return best_first(grid, start, goal, [&](std::size_t cell, const Index3& x, int d, auto& relax) {
    const std::uint32_t succ = t.successors(d, free_mask(grid, x, d));
    for (int m = 0; m < 27; ++m) {
      if (!((succ >> m) & 1)) continue;
      if (auto jp = jumper.jump(x, m)) relax(cell, jp->first, jp->second * step_len(dir_vec(m)), m);
    }
  });
}

PathResult find_path(const VoxelGrid& grid, const Vec3& start, const Vec3& goal) {
  return run_search(grid, start, goal, true);
}

PathResult find_path_astar(const VoxelGrid& grid, const Vec3& start, const Vec3& goal) {
  return run_search(grid, start, goal, false);
}

double obstacle_clearance(const VoxelGrid& grid, const Vec3& p, double max_range) {
  return nearest_occupied(grid, p, max_range).dist;
}

bool segment_free(const VoxelGrid& grid, const Vec3& a, const Vec3& b) {
  const double len = (b - a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / (0.25 * grid.voxel_size()))));
  for (int i = 0; i <= n; ++i) {
    const Vec3 p = a + (b - a) * (static_cast<double>(i) / n);
    if (!grid.is_free(grid.index_of(p))) return false;
  }
  return true;
}

Path push_away(const VoxelGrid& grid, const Path& path, const PushAwayParams& params) {
  Path out = path;
  auto& w = out.waypoints;
  if (w.size() < 3) return out;
  const double step = params.step_gain * grid.voxel_size();
  for (int sweep = 0; sweep < params.sweeps; ++sweep) {
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
      const Nearest near = nearest_occupied(grid, w[i], params.influence_radius);
      if (!(near.dist < params.influence_radius) || near.dist <= 0.0) continue;
      // Gradient of (1/d - 1/R)^2 points toward the obstacle; step against it.
      const Vec3 cand = w[i] + step * (w[i] - near.point) / near.dist;
      if (!grid.is_free(grid.index_of(cand))) continue;
      if (obstacle_clearance(grid, cand, params.influence_radius + step) < near.dist) continue;
      if (cand == w[i - 1] || cand == w[i + 1]) continue;
      if (!segment_free(grid, w[i - 1], cand) || !segment_free(grid, cand, w[i + 1])) continue;
      w[i] = cand;
    }
  }
  return out;
}

Path stitch(std::span<const Vec3> prefix, const Path& new_path) {
  if (prefix.empty()) return new_path;
  if (new_path.waypoints.empty() || (new_path.waypoints.front() - prefix.back()).norm() > 1e-9)
    throw ContractError("stitch: new path does not start at the end of the previous reference");
  Path out;
  auto push = [&](const Vec3& p) {
    if (out.waypoints.empty() || out.waypoints.back() != p) out.waypoints.push_back(p);
  };
  for (const auto& p : prefix) push(p);
  for (std::size_t i = 1; i < new_path.waypoints.size(); ++i) push(new_path.waypoints[i]);
  return out;
}

}  // namespace swarm
