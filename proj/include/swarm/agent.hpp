#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "swarm/global_path.hpp"
#include "swarm/mpc.hpp"
#include "swarm/safe_corridor.hpp"
#include "swarm/tasc.hpp"
#include "swarm/voxel_grid.hpp"

namespace swarm {

struct PlannerParams {
  int N = 9;
  double h = 0.1;
  double v_samp = 4.5;
  int P_hor = 3;
  double d_thresh = 0.4;
  double stall_advance = 0.1;  // m the plan end must move per iteration while the reference is held
  double ref_brake = 1.5;  // m/s^2 the reference slows at near the final goal; 0 disables
  Limits limits;
  MpcWeights weights{1.0, 1e-4};  // lighter jerk penalty than the solver default, see README
  double d_rad = 0.125;
  double c = 0.1;
  double m_amp = 0.05;
  int K = 20;
  Vec3 grid_extent = Vec3(15.0, 15.0, 3.3);
  double voxel_size = 0.3;
  // Extra clearance against other agents; negative selects the largest
  // deviation of a jerk-limited step from its chord.
  double agent_margin = -1.0;
  double obstacle_margin = 0.05;  // planning-only growth of obstacle boxes
  PushAwayParams push_away;
  int max_qp_solves = 5000;

  double effective_agent_margin() const;
};

enum class PlanStatus { Planned, Infeasible, NoCorridor };

const char* to_string(PlanStatus status);

struct PlanOutput {
  DiscreteTrajectory traj;  // iteration stamped; timing left to the caller
  PlanStatus status = PlanStatus::Planned;
  int qp_solves = 0;
};

// The per-agent pipeline: grid, global path, corridor, TASC, MIQP. Keeps
// the state carried between iterations (reference, corridor, last path).
class AgentPlanner {
 public:
  AgentPlanner(AgentId id, const Vec3& goal, const PlannerParams& params, const WorldModel& world);

  // Plan at boundary k from own_last's state at step k+1. On failure the
  // returned trajectory is own_last shifted to k, so executing it changes
  // nothing.
  PlanOutput plan(long k, const DiscreteTrajectory& own_last, const std::vector<PeerPlan>& peers);

  const LocalReference* reference() const { return ref_ ? &*ref_ : nullptr; }
  const SafeCorridor& corridor() const { return corridor_; }
  const Path& last_path() const { return last_path_; }

 private:
  AgentId id_;
  Vec3 goal_;
  PlannerParams params_;
  WorldModel planning_world_;
  SafeCorridor corridor_;
  std::optional<LocalReference> ref_;
  Path last_path_;
  long ref_k_ = -1;  // iteration ref_ was expressed at
  double last_lag_ = std::numeric_limits<double>::infinity();
  bool recovering_ = false;
  std::optional<Vec3> last_end_;
};

// Path with its first s metres removed.
Path trim_front(const Path& path, double s);

}  // namespace swarm
