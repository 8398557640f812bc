#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "swarm/voxel_grid.hpp"

namespace swarm {

struct Violation {
  enum class Kind { AgentAgent, AgentObstacle };
  Kind kind = Kind::AgentAgent;
  AgentId a = -1;
  AgentId b = -1;     // second agent for AgentAgent
  int obstacle = -1;  // obstacle index for AgentObstacle
  double distance = 0.0;  // center distance for AgentAgent
};

// Pairs closer than 2 d_rad, and agents whose center is strictly inside an
// obstacle box.
std::vector<Violation> check_collisions(const std::vector<Vec3>& positions, const WorldModel& world,
                                        double d_rad);

struct Costs {
  double accel = 0.0;  // integral of |a|^2
  double jerk = 0.0;   // integral of |j|^2
};

// Exact integrals for piecewise-constant jerk starting from acceleration a0.
Costs accumulate_costs(const std::vector<Vec3>& jerks, double h, const Vec3& a0 = Vec3::Zero());

// Mid-flight halts in a speed trace: runs of at least min_dwell samples
// below v_stop that start after the speed first reached v_stop and end with
// the agent moving again before sample `arrival` (exclusive; the whole
// trace when absent).
int count_stops(const std::vector<double>& speeds, double v_stop, int min_dwell,
                std::optional<std::size_t> arrival = std::nullopt);

}  // namespace swarm
