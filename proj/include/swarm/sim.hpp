#pragma once

#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "swarm/agent.hpp"
#include "swarm/metrics.hpp"
#include "swarm/scheduler.hpp"

namespace swarm {

struct NetworkModel {
  double latency = 0.0;  // s, for every linked pair without an override
  std::map<std::pair<AgentId, AgentId>, double> pair_latency;  // keyed (min, max)
  std::set<std::pair<AgentId, AgentId>> unlinked;              // keyed (min, max)
  double comm_range = std::numeric_limits<double>::infinity();

  bool linked(AgentId a, AgentId b) const;
  double latency_between(AgentId a, AgentId b) const;
};

enum class ComputeMode { Synthetic, Measured };

struct ComputeModel {
  ComputeMode mode = ComputeMode::Synthetic;
  std::vector<double> durations;  // s per agent, Synthetic mode
};

struct SimParams {
  double timeout = 60.0;         // s of simulated time
  double goal_tolerance = 0.05;  // m
  double v_stop = 0.05;          // m/s
  int min_dwell = 3;             // samples
  int substeps = 10;             // samples per period
};

struct AgentSpec {
  Vec3 start = Vec3::Zero();
  Vec3 goal = Vec3::Zero();
};

// A fully resolved run: generators already sampled.
struct Scenario {
  std::vector<AgentSpec> agents;
  WorldModel world;
  NetworkModel network;
  ComputeModel compute;
  PlannerParams planner;
  SimParams sim;
};

struct AgentMetrics {
  bool arrived = false;
  double flight_time = 0.0;  // s until arrival, or until the run ended
  double distance = 0.0;     // m travelled until then
  double mean_speed = 0.0;
  double accel_cost = 0.0;
  double jerk_cost = 0.0;
  int stops = 0;
  int plans = 0;
  int skips = 0;
  int recommits = 0;
  std::vector<double> compute_times;  // s per planning iteration
};

struct MetricsReport {
  bool collision = false;
  int violation_samples = 0;  // sub-samples with at least one violation
  double min_pair_distance = std::numeric_limits<double>::infinity();
  bool timeout = false;
  int num_stops = 0;
  double end_time = 0.0;
  double dynamics_residual = 0.0;  // executed vs committed states
  std::vector<AgentMetrics> agents;
};

struct RunResult {
  MetricsReport metrics;
  std::string trajectory_csv;
  std::string decision_log;
};

// Fails with ClockSkew if a message is ever received before it was sent.
RunResult run_scenario(const Scenario& scenario);

inline constexpr const char* kTrajectoryHeader = "time,agent,px,py,pz,vx,vy,vz,ax,ay,az,jx,jy,jz";

}  // namespace swarm
