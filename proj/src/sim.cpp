#include "swarm/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <queue>

namespace swarm {

namespace {

std::pair<AgentId, AgentId> key(AgentId a, AgentId b) { return {std::min(a, b), std::max(a, b)}; }

using Micros = std::int64_t;

Micros to_us(double s) { return static_cast<Micros>(std::llround(s * 1e6)); }
double to_s(Micros us) { return static_cast<double>(us) * 1e-6; }

// Same-instant order: deliveries, then completions, then the boundary.
enum class EventKind { Deliver = 0, Complete = 1, Boundary = 2 };

struct Event {
  Micros t;
  EventKind kind;
  long seq;
  int agent;
  std::size_t payload;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

struct Pending {
  long k;
  PlanOutput out;
  Micros started;
};

struct AgentRuntime {
  AgentRuntime(AgentId id, const AgentSpec& spec, const PlannerParams& P, const WorldModel& world)
      : planner(id, spec.goal, P, world), scheduler(id), committed(rest_trajectory(spec.start, P.N, P.h, -1)),
        state(AgentState::at_rest(spec.start)), last_sample(spec.start) {}

  AgentPlanner planner;
  Scheduler scheduler;
  DiscreteTrajectory committed;
  std::optional<DiscreteTrajectory> last_broadcast;
  AgentState state;  // executed state at the current boundary
  bool busy = false;
  std::optional<std::size_t> arrival_sample;
  std::vector<double> speeds;
  std::vector<Vec3> jerks;
  double distance = 0.0;
  Vec3 last_sample = Vec3::Zero();
};

void append_row(std::string& out, double t, int agent, const AgentState& s, const Vec3& j) {
  char buf[384];
  std::snprintf(buf, sizeof buf, "%.6f,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", t, agent,
                s.position.x(), s.position.y(), s.position.z(), s.velocity.x(), s.velocity.y(), s.velocity.z(),
                s.acceleration.x(), s.acceleration.y(), s.acceleration.z(), j.x(), j.y(), j.z());
  out += buf;
}

}  // namespace

bool NetworkModel::linked(AgentId a, AgentId b) const { return a != b && !unlinked.count(key(a, b)); }

double NetworkModel::latency_between(AgentId a, AgentId b) const {
  auto it = pair_latency.find(key(a, b));
  return it == pair_latency.end() ? latency : it->second;
}

RunResult run_scenario(const Scenario& sc) {
  const PlannerParams& P = sc.planner;
  const int n = static_cast<int>(sc.agents.size());
  const Micros h_us = to_us(P.h);
  if (h_us <= 0 || sc.sim.substeps < 1 || h_us % sc.sim.substeps != 0)
    throw ContractError("run_scenario: the period must split evenly into substeps");
  if (sc.compute.mode == ComputeMode::Synthetic && static_cast<int>(sc.compute.durations.size()) != n)
    throw ContractError("run_scenario: one synthetic duration per agent required");

  std::vector<AgentRuntime> agents;
  agents.reserve(n);
  for (int i = 0; i < n; ++i) agents.emplace_back(i, sc.agents[i], P, sc.world);

  RunResult result;
  MetricsReport& M = result.metrics;
  M.agents.assign(n, {});
  result.trajectory_csv = std::string(kTrajectoryHeader) + "\n";
  std::string& csv = result.trajectory_csv;
  std::string& log = result.decision_log;

  std::priority_queue<Event, std::vector<Event>, Later> queue;
  std::vector<std::pair<int, TrajectoryMessage>> messages;
  std::vector<Pending> pending;
  long seq = 0;
  queue.push({0, EventKind::Boundary, seq++, -1, 0});
  const long last_k = static_cast<long>(std::ceil(sc.sim.timeout / P.h));
  std::size_t sample_index = 0;

  auto in_range = [&](int i, int j) {
    return sc.network.linked(i, j) &&
           (agents[i].state.position - agents[j].state.position).norm() <= sc.network.comm_range;
  };

  while (!queue.empty()) {
    const Event ev = queue.top();
    queue.pop();

    if (ev.kind == EventKind::Deliver) {
      auto& [to, msg] = messages[ev.payload];
      agents[to].scheduler.receive(std::move(msg), to_s(ev.t));
      continue;
    }

    if (ev.kind == EventKind::Complete) {
      AgentRuntime& a = agents[ev.agent];
      Pending& p = pending[ev.payload];
      DiscreteTrajectory traj = std::move(p.out.traj);
      PlanStatus status = p.out.status;
      // A plan that ran past the next boundary starts in the past; keep
      // flying the old one.
      if (ev.t > p.started + h_us && status == PlanStatus::Planned) {
        traj = shift_trajectory(a.committed, p.k);
        status = PlanStatus::Infeasible;
      }
      if (status != PlanStatus::Planned) ++M.agents[ev.agent].recommits;
      traj.gen_start = to_s(p.started);
      traj.gen_end = to_s(ev.t);
      a.committed = traj;
      a.last_broadcast = traj;
      a.busy = false;
      char buf[160];
      std::snprintf(buf, sizeof buf, "k=%ld t=%.6f agent=%d DONE %s qp=%d\n", p.k, to_s(ev.t), ev.agent,
                    status == PlanStatus::Planned ? "planned" : "recommit", p.out.qp_solves);
      log += buf;
      for (int j = 0; j < n; ++j) {
        if (!in_range(ev.agent, j)) continue;
        messages.push_back({j, TrajectoryMessage{ev.agent, traj}});
        queue.push({ev.t + to_us(sc.network.latency_between(ev.agent, j)), EventKind::Deliver, seq++, j,
                    messages.size() - 1});
      }
      continue;
    }

    // Period boundary k: execute segment k for everyone, then gate.
    const long k = ev.t / h_us;
    std::vector<Vec3> jerk(n);
    for (int i = 0; i < n; ++i) {
      AgentRuntime& a = agents[i];
      const AgentState planned = a.committed.state_at_step(k);
      M.dynamics_residual = std::max({M.dynamics_residual, (planned.position - a.state.position).norm(),
                                      (planned.velocity - a.state.velocity).norm(),
                                      (planned.acceleration - a.state.acceleration).norm()});
      jerk[i] = a.committed.jerk_at_step(k);
    }
    const int sub = sc.sim.substeps;
    const double dt = P.h / sub;
    std::vector<Vec3> positions(n);
    for (int s = 0; s < sub; ++s) {
      const double t = to_s(ev.t + s * (h_us / sub));
      for (int i = 0; i < n; ++i) {
        AgentRuntime& a = agents[i];
        const AgentState x = s == 0 ? a.state : propagate(a.state, jerk[i], s * dt);
        append_row(csv, t, i, x, jerk[i]);
        positions[i] = x.position;
        const double speed = x.velocity.norm();
        a.speeds.push_back(speed);
        if (!a.arrival_sample) {
          a.distance += (x.position - a.last_sample).norm();
          if ((x.position - sc.agents[i].goal).norm() <= sc.sim.goal_tolerance && speed < sc.sim.v_stop) {
            a.arrival_sample = sample_index;
            M.agents[i].arrived = true;
            M.agents[i].flight_time = t;
          }
        }
        a.last_sample = x.position;
      }
      const auto v = check_collisions(positions, sc.world, P.d_rad);
      if (!v.empty()) {
        M.collision = true;
        ++M.violation_samples;
      }
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          M.min_pair_distance = std::min(M.min_pair_distance, (positions[i] - positions[j]).norm());
      ++sample_index;
    }
    for (int i = 0; i < n; ++i) {
      agents[i].jerks.push_back(jerk[i]);
      agents[i].state = propagate(agents[i].state, jerk[i], P.h);
    }

    const bool all_arrived =
        std::all_of(agents.begin(), agents.end(), [](const AgentRuntime& a) { return a.arrival_sample.has_value(); });
    if (all_arrived || k >= last_k) {
      M.timeout = !all_arrived;
      M.end_time = to_s(ev.t + h_us);
      break;
    }

    for (int i = 0; i < n; ++i) {
      AgentRuntime& a = agents[i];
      Decision d;
      if (a.busy) {
        d.reason = SkipReason::Busy;
      } else {
        std::vector<AgentId> peers;
        if (k > 0)
          for (int j = 0; j < n; ++j)
            if (in_range(i, j)) peers.push_back(j);
        d = a.scheduler.gate(peers, a.last_broadcast ? &*a.last_broadcast : nullptr, to_s(ev.t));
      }
      log += format_decision(k, to_s(ev.t), i, d) + "\n";
      if (!d.plan) {
        ++M.agents[i].skips;
        continue;
      }
      ++M.agents[i].plans;
      std::vector<PeerPlan> peers;
      for (auto& m : d.consumed) peers.push_back({m.sender, std::move(m.payload)});

      const auto wall0 = std::chrono::steady_clock::now();
      PlanOutput out;
      try {
        out = a.planner.plan(k, a.committed, peers);
      } catch (const CoincidentAgentsError&) {
        out.traj = shift_trajectory(a.committed, k);
        out.status = PlanStatus::Infeasible;
      }
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
      const double duration = sc.compute.mode == ComputeMode::Synthetic ? sc.compute.durations[i] : wall;
      M.agents[i].compute_times.push_back(duration);
      a.busy = true;
      pending.push_back({k, std::move(out), ev.t});
      queue.push({ev.t + std::max<Micros>(0, to_us(duration)), EventKind::Complete, seq++, i, pending.size() - 1});
    }
    queue.push({ev.t + h_us, EventKind::Boundary, seq++, -1, 0});
  }

  for (int i = 0; i < n; ++i) {
    AgentRuntime& a = agents[i];
    AgentMetrics& am = M.agents[i];
    if (!am.arrived) am.flight_time = M.end_time;
    am.distance = a.distance;
    am.mean_speed = am.flight_time > 0 ? am.distance / am.flight_time : 0.0;
    const Costs c = accumulate_costs(a.jerks, P.h);
    am.accel_cost = c.accel;
    am.jerk_cost = c.jerk;
    am.stops = count_stops(a.speeds, sc.sim.v_stop, sc.sim.min_dwell, a.arrival_sample);
    M.num_stops += am.stops;
  }
  return result;
}

}  // namespace swarm
