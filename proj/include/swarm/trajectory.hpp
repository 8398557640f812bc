#pragma once

#include <vector>

#include "swarm/geometry.hpp"

namespace swarm {

struct AgentState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();

  static AgentState at_rest(const Vec3& p) { return {p, Vec3::Zero(), Vec3::Zero()}; }
};

struct Limits {
  double v_max = 10.0;
  double a_max = 20.0;
  double j_max = 30.0;
};

// Exact triple-integrator step under constant jerk.
AgentState propagate(const AgentState& x, const Vec3& jerk, double h);

// A planned trajectory. states[i] is reached at absolute step
// iteration + 1 + i: the plan produced at period boundary k starts from the
// state committed for the next boundary.
struct DiscreteTrajectory {
  std::vector<AgentState> states;  // N + 1
  std::vector<Vec3> jerks;         // N, jerks[i] drives states[i] -> states[i+1]
  double step = 0.1;
  long iteration = 0;
  double gen_start = 0.0;
  double gen_end = 0.0;

  int horizon() const { return static_cast<int>(jerks.size()); }
  long first_step() const { return iteration + 1; }
  // State at an absolute step; holds the final state past the end.
  AgentState state_at_step(long abs_step) const;
  Vec3 jerk_at_step(long abs_step) const;
};

// Trajectory resting at p for `horizon` steps.
DiscreteTrajectory rest_trajectory(const Vec3& p, int horizon, double h, long iteration);

// Re-expresses traj as if planned at new_iteration (>= traj.iteration):
// drops elapsed states and pads the tail with zero-jerk steps.
DiscreteTrajectory shift_trajectory(const DiscreteTrajectory& traj, long new_iteration);

// Largest |states[i+1] - propagate(states[i], jerks[i], h)| over all components.
double dynamics_residual(const DiscreteTrajectory& traj);

}  // namespace swarm
