#include "swarm/agent.hpp"

#include <cmath>

namespace swarm {

double PlannerParams::effective_agent_margin() const {
  if (agent_margin >= 0.0) return agent_margin;
  // A segment's offset from its chord is at most h^2/8 times the largest
  // acceleration along the plane normal; per-axis limits allow sqrt(3) a_max.
  return std::sqrt(3.0) * limits.a_max * h * h / 8.0;
}

const char* to_string(PlanStatus status) {
  switch (status) {
    case PlanStatus::Planned: return "planned";
    case PlanStatus::Infeasible: return "infeasible";
    case PlanStatus::NoCorridor: return "no_corridor";
  }
  return "unknown";
}

Path trim_front(const Path& path, double s) {
  if (path.waypoints.empty() || s <= 0.0) return path;
  Path out;
  for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i) {
    const Vec3& a = path.waypoints[i];
    const Vec3& b = path.waypoints[i + 1];
    const double len = (b - a).norm();
    if (s < len) {
      out.waypoints.push_back(a + (b - a) * (s / len));
      out.waypoints.insert(out.waypoints.end(), path.waypoints.begin() + i + 1, path.waypoints.end());
      if (out.waypoints.size() > 1 && out.waypoints[0] == out.waypoints[1]) out.waypoints.erase(out.waypoints.begin());
      return out;
    }
    s -= len;
  }
  out.waypoints.push_back(path.waypoints.back());
  return out;
}

AgentPlanner::AgentPlanner(AgentId id, const Vec3& goal, const PlannerParams& params, const WorldModel& world)
    : id_(id), goal_(goal), params_(params), planning_world_(world) {
  for (auto& box : planning_world_.obstacles) {
    box.min.array() -= params.obstacle_margin;
    box.max.array() += params.obstacle_margin;
  }
}

namespace {

void push_distinct(std::vector<Vec3>& pts, const Vec3& p) {
  if (pts.empty() || pts.back() != p) pts.push_back(p);
}

// Index of a polyhedron holding both ends of every segment, or nullopt.
std::optional<Assignment> assignment_for(const TimeAwareSafeCorridor& tasc, const DiscreteTrajectory& traj) {
  Assignment a;
  for (std::size_t s = 0; s < tasc.slices.size(); ++s) {
    const auto& polys = tasc.slices[s].polyhedra;
    int found = -1;
    for (std::size_t j = 0; j < polys.size() && found < 0; ++j)
      if (polys[j].contains(traj.states[s].position) && polys[j].contains(traj.states[s + 1].position))
        found = static_cast<int>(j);
    if (found < 0) return std::nullopt;
    a.push_back(found);
  }
  return a;
}

// A point resting on a corridor face can round into the occupied voxel
// behind it. Search from the nearest free neighbour instead and keep the
// true start in front.
PathResult search_from(const VoxelGrid& grid, const Vec3& start, const Vec3& target) {
  const Index3 s = grid.index_of(start);
  if (!grid.in_bounds(s) || grid.is_free(s)) return find_path(grid, start, target);
  std::optional<Index3> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int dx = -1; dx <= 1; ++dx)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dz = -1; dz <= 1; ++dz) {
        const Index3 n{s[0] + dx, s[1] + dy, s[2] + dz};
        if (!grid.in_bounds(n) || !grid.is_free(n)) continue;
        const double d = (grid.center_of(n) - start).norm();
        if (d < best_d) best_d = d, best = n;
      }
  if (!best) return find_path(grid, start, target);
  PathResult r = find_path(grid, grid.center_of(*best), target);
  if (r.status == PathStatus::Ok) r.path.waypoints.insert(r.path.waypoints.begin(), start);
  return r;
}

}  // namespace

PlanOutput AgentPlanner::plan(long k, const DiscreteTrajectory& own_last, const std::vector<PeerPlan>& peers) {
  const PlannerParams& P = params_;
  if (own_last.horizon() != P.N) throw ContractError("AgentPlanner: own trajectory has the wrong horizon");
  const DiscreteTrajectory own = shift_trajectory(own_last, k);
  const AgentState x0 = own.states.front();

  PlanOutput out;
  out.traj = own;
  out.traj.iteration = k;

  // Occupancy around the agent. Path search sees cleared borders, except
  // outside the world bounds; corridors only ever see the true occupancy.
  const VoxelGrid occupied =
      inflate(rasterize(planning_world_, x0.position, P.grid_extent, P.voxel_size), P.d_rad);
  VoxelGrid search = clear_borders(occupied);
  for (int i = 0; i < search.counts()[0]; ++i)
    for (int j = 0; j < search.counts()[1]; ++j)
      for (int l = 0; l < search.counts()[2]; ++l)
        if (!planning_world_.bounds.contains(search.center_of({i, j, l}))) search.set({i, j, l}, Occupancy::Occupied);

  // A held reference the plan neither gains on nor moves toward is a dead
  // end (typically a corner the short horizon will not leave); start over
  // from the agent.
  if (ref_) {
    const Vec3 end = own_last.states.back().position;
    const double lag = (end - ref_->points.back()).norm();
    const bool stalled = lag > P.d_thresh && lag >= last_lag_ - 1e-3 && last_end_ &&
                         (end - *last_end_).norm() < P.stall_advance;
    last_lag_ = lag;
    if (stalled) {
      ref_.reset();
      recovering_ = true;
      last_lag_ = std::numeric_limits<double>::infinity();
    }
  }
  last_end_ = own_last.states.back().position;

  // Global path from the end of the previous reference, stitched behind it.
  const Vec3 start = ref_ ? ref_->points.back() : x0.position;
  const Vec3 target = intermediate_goal(search, x0.position, goal_);
  const PathResult found = search_from(search, start, target);
  Path stitched;
  if (found.status == PathStatus::Ok) {
    const Path smooth = push_away(search, found.path, P.push_away);
    stitched = ref_ ? stitch(ref_->points, smooth) : smooth;
    last_path_ = stitched;
  } else if (!last_path_.waypoints.empty()) {
    stitched = last_path_;
  } else {
    stitched.waypoints = {x0.position};
  }

  // The reference is a trajectory in time. A fresh one continues along the
  // stitched path from where the previous one expected the agent to be by
  // now; a held one drops the samples that have elapsed and repeats its end.
  // After a stall a held reference only drops the samples the agent has
  // already reached, so it cannot run off again.
  const bool ends_at_goal = (stitched.waypoints.back() - goal_).norm() < 1e-9;
  auto fresh = [&](const Path& path) {
    ref_ = sample_reference_braking(path, P.v_samp, P.N, P.h, ends_at_goal ? P.ref_brake : 0.0);
  };
  if (!ref_) {
    fresh(stitched);
  } else {
    const long elapsed = std::max(1L, k - ref_k_);
    const int N = static_cast<int>(ref_->points.size());
    if ((own_last.states.back().position - ref_->points.back()).norm() <= P.d_thresh) {
      const int last_used = static_cast<int>(std::min<long>(elapsed, N)) - 1;
      double s0 = 0.0;
      for (int i = 0; i < last_used; ++i) s0 += (ref_->points[i + 1] - ref_->points[i]).norm();
      fresh(trim_front(stitched, s0));
      recovering_ = false;
    } else {
      long shift = elapsed;
      if (recovering_) {
        int nearest = 0;
        for (int i = 1; i < N; ++i)
          if ((ref_->points[i] - x0.position).norm() < (ref_->points[nearest] - x0.position).norm()) nearest = i;
        shift = std::min<long>(shift, nearest);
      }
      LocalReference held;
      for (int i = 0; i < N; ++i) held.points.push_back(ref_->points[std::min<long>(i + shift, N - 1)]);
      ref_ = held;
    }
  }
  ref_k_ = k;

  std::vector<Vec3> corridor_path;
  push_distinct(corridor_path, x0.position);
  for (const auto& w : stitched.waypoints) push_distinct(corridor_path, w);
  std::vector<Vec3> traj_points;
  for (const auto& s : own.states) traj_points.push_back(s.position);
  corridor_ = update_corridor(corridor_, traj_points, Path{corridor_path}, occupied, P.P_hor);
  if (corridor_.polyhedra.empty()) {
    out.status = PlanStatus::NoCorridor;
    return out;
  }

  TascParams tp;
  tp.plane = {P.d_rad, P.c, P.effective_agent_margin()};
  tp.m_amp = P.m_amp;
  tp.K = P.K;
  const TimeAwareSafeCorridor tasc = build_tasc(corridor_.polyhedra, own, own_last.iteration, peers, tp);

  MpcProblem problem(tasc, x0, *ref_, P.limits, P.weights, P.h);
  MiqpOptions opt;
  opt.max_qp_solves = P.max_qp_solves;
  opt.warm_start = assignment_for(tasc, own);
  const MiqpOutcome res = problem.solve_miqp(opt);
  out.qp_solves = res.qp_solves;
  if (res.status != SolveStatus::Optimal) {
    out.status = PlanStatus::Infeasible;
    return out;
  }
  out.traj.states = res.solution.states;
  out.traj.jerks = res.solution.jerks;
  out.status = PlanStatus::Planned;
  (void)id_;
  return out;
}

}  // namespace swarm
