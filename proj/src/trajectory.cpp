#include "swarm/trajectory.hpp"

#include <algorithm>

namespace swarm {

AgentState propagate(const AgentState& x, const Vec3& jerk, double h) {
  if (h <= 0.0) throw ContractError("propagate: step must be positive");
  const double h2 = h * h, h3 = h2 * h;
  AgentState out;
  out.position = x.position + x.velocity * h + x.acceleration * (h2 / 2.0) + jerk * (h3 / 6.0);
  out.velocity = x.velocity + x.acceleration * h + jerk * (h2 / 2.0);
  out.acceleration = x.acceleration + jerk * h;
  return out;
}

AgentState DiscreteTrajectory::state_at_step(long abs_step) const {
  const long i = abs_step - first_step();
  if (i < 0) throw ContractError("state_at_step: step precedes the trajectory");
  if (i >= static_cast<long>(states.size())) return states.back();
  return states[i];
}

Vec3 DiscreteTrajectory::jerk_at_step(long abs_step) const {
  const long i = abs_step - first_step();
  if (i < 0) throw ContractError("jerk_at_step: step precedes the trajectory");
  if (i >= static_cast<long>(jerks.size())) return Vec3::Zero();
  return jerks[i];
}

DiscreteTrajectory rest_trajectory(const Vec3& p, int horizon, double h, long iteration) {
  DiscreteTrajectory t;
  t.step = h;
  t.iteration = iteration;
  t.states.assign(horizon + 1, AgentState::at_rest(p));
  t.jerks.assign(horizon, Vec3::Zero());
  return t;
}

DiscreteTrajectory shift_trajectory(const DiscreteTrajectory& traj, long new_iteration) {
  if (new_iteration < traj.iteration) throw ContractError("shift_trajectory: cannot shift backwards");
  const long shift = new_iteration - traj.iteration;
  const int n = traj.horizon();
  DiscreteTrajectory out = traj;
  out.iteration = new_iteration;
  out.states.clear();
  out.jerks.clear();
  for (long i = shift; i < n; ++i) {
    out.states.push_back(traj.states[i]);
    out.jerks.push_back(traj.jerks[i]);
  }
  out.states.push_back(traj.states[n]);
  while (static_cast<int>(out.jerks.size()) < n) {
    out.states.push_back(propagate(out.states.back(), Vec3::Zero(), traj.step));
    out.jerks.push_back(Vec3::Zero());
  }
  return out;
}

double dynamics_residual(const DiscreteTrajectory& traj) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < traj.states.size(); ++i) {
    const AgentState next = propagate(traj.states[i], traj.jerks[i], traj.step);
    worst = std::max({worst, (next.position - traj.states[i + 1].position).lpNorm<Eigen::Infinity>(),
                      (next.velocity - traj.states[i + 1].velocity).lpNorm<Eigen::Infinity>(),
                      (next.acceleration - traj.states[i + 1].acceleration).lpNorm<Eigen::Infinity>()});
  }
  return worst;
}

}  // namespace swarm
