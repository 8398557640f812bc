#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/sim.hpp"

namespace swarm {

// Bad scenario file. what() names the offending field ("planner.limits.a_max")
// or, for syntax errors, the line and column.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Agents evenly spaced on a horizontal circle, each flying to the opposite
// point. Starts (and goals with them) get a uniform offset of up to
// `jitter` per horizontal axis, drawn per run.
struct CircleSpec {
  int count = 10;
  double radius = 10.0;
  Vec3 center = Vec3(0, 0, 1);
  double jitter = 0.0;
};

// Boxes of a fixed size standing on region.min.z, with their footprint
// centers drawn uniformly over the region's x-y rectangle. A draw whose
// footprint comes within `clearance` of an agent's start or goal (x-y) is
// redrawn.
struct ObstacleSpec {
  int count = 0;
  Vec3 size = Vec3(0.2, 0.2, 1.5);
  AlignedBox region;
  double clearance = 0.5;
};

// Synthetic planning durations are drawn per agent per run, uniform in
// [min, max].
struct ComputeSpec {
  ComputeMode mode = ComputeMode::Synthetic;
  double min = 0.02;
  double max = 0.02;
};

struct ScenarioConfig {
  std::string name;
  std::optional<CircleSpec> circle;
  std::vector<AgentSpec> agents;  // used when circle is unset
  AlignedBox bounds{Vec3(-20, -20, 0), Vec3(20, 20, 3)};
  std::vector<AlignedBox> boxes;  // fixed obstacles
  std::optional<ObstacleSpec> obstacles;
  NetworkModel network;
  ComputeSpec compute;
  PlannerParams planner;
  SimParams sim;
  int runs = 1;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

// Seed of run `run`, a mix of the master seed and the index.
std::uint64_t run_seed(std::uint64_t master, int run);

// Samples every generator of `config` for one run.
Scenario make_scenario(const ScenarioConfig& config, int run);

}  // namespace swarm
