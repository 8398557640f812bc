// End-to-end checks of the planner against its headline targets. Prints one
// PASS or FAIL line per target and exits non-zero if any fails.

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "support/decision_log.hpp"
#include "support/mpc_instances.hpp"
#include "swarm/batch.hpp"
#include "swarm/global_path.hpp"
#include "swarm/tasc.hpp"

using namespace swarm;

namespace {

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("%s  %-22s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ScenarioConfig scenario(const char* file) { return load_config(std::string(SWARM_SCENARIO_DIR) + "/" + file); }

struct Sweep {
  int runs = 0, collisions = 0, stops = 0, timeouts = 0, violations = 0, arrived = 0, agents = 0;
  double flight_sum = 0.0;
  std::vector<std::string> logs;
};

Sweep sweep(ScenarioConfig config, double latency, int runs) {
  config.network.latency = latency;
  Sweep s;
  for (int run = 0; run < runs; ++run) {
    const RunResult r = run_scenario(make_scenario(config, run));
    const MetricsReport& m = r.metrics;
    ++s.runs;
    s.collisions += m.collision ? 1 : 0;
    s.stops += m.num_stops;
    s.timeouts += m.timeout ? 1 : 0;
    s.violations += m.violation_samples;
    for (const auto& a : m.agents) {
      s.arrived += a.arrived ? 1 : 0;
      s.flight_sum += a.flight_time;
      ++s.agents;
    }
    s.logs.push_back(r.decision_log);
  }
  return s;
}

void safety_and_flight_time() {
  const ScenarioConfig config = scenario("circle10.json");
  bool ok = true;
  std::string detail;
  double mean_flight_at_zero = 0.0;
  Sweep at_period;
  for (double latency : {0.0, 0.05, 0.1}) {
    Sweep s = sweep(config, latency, 20);
    ok = ok && s.collisions == 0 && s.stops == 0;
    detail += fmt("%.0fms: %d/%d runs with collisions, %d stops, mean flight %.2f s; ", latency * 1e3, s.collisions,
                  s.runs, s.stops, s.flight_sum / s.agents);
    if (latency == 0.0) mean_flight_at_zero = s.flight_sum / s.agents;
    if (latency == 0.1) at_period = std::move(s);
  }
  report(ok, "circle-safety", detail);

  // Latency equal to the period: after two warm-up plans each agent plans
  // every second period.
  bool doubled = config.planner.h == 0.1;
  int agents = 0;
  for (const auto& log : at_period.logs)
    for (const auto& [agent, ks] : testing::plan_iterations(log)) {
      ++agents;
      doubled = doubled && testing::steady_period(ks, 2, 2);
    }
  report(doubled && agents == 200, "period-doubling",
         fmt("%d agent logs at h=100 ms, latency 100 ms, all steady at 2h: %s", agents, doubled ? "yes" : "no"));

  report(mean_flight_at_zero >= 5.0775 && mean_flight_at_zero <= 8.4625, "flight-time",
         fmt("mean %.3f s over 20 runs at 0 ms, accepted 5.08-8.46 s", mean_flight_at_zero));
}

void obstacle_field() {
  const ScenarioConfig config = scenario("obstacles12.json");
  bool ok = true;
  std::string detail;
  for (double latency : {0.0, 0.05, 0.1, 0.15}) {
    const Sweep s = sweep(config, latency, 5);
    ok = ok && s.arrived == s.agents && s.violations == 0 && s.timeouts == 0;
    detail += fmt("%.0fms: %d/%d arrived, %d violation samples; ", latency * 1e3, s.arrived, s.agents, s.violations);
  }
  report(ok, "obstacle-field", detail);
}

void perturbation_symmetry() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const PlannerParams p;
  const HyperplaneParams hp{p.d_rad, p.c, p.effective_agent_margin()};
  double worst_sym = 0.0, worst_gap = std::numeric_limits<double>::infinity(), worst_pair = worst_gap;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 n = Vec3(nd(rng), nd(rng), nd(rng)).normalized();
    const double m = p.m_amp * u01(rng);
    worst_sym = std::max(worst_sym, (perturb_normal(n, p.c, m) + perturb_normal(-n, p.c, m)).lpNorm<Eigen::Infinity>());

    // Two agents at least a safety distance apart, each with its own plane.
    const Vec3 pi(nd(rng), nd(rng), nd(rng));
    const Vec3 pj = pi + (2.0 * p.d_rad + 2.0 * u01(rng)) * n;
    const auto hi = separating_hyperplane(pi, pj, hp, m);
    const auto hj = separating_hyperplane(pj, pi, hp, m);
    // Over the two halfspaces, the least separation along the shared normal
    // is exactly minus the sum of the offsets.
    worst_gap = std::min(worst_gap, -(hi.plane.offset + hj.plane.offset));
    for (int k = 0; k < 5; ++k) {
      const Vec3 xi = pi + Vec3(nd(rng), nd(rng), nd(rng));
      const Vec3 xj = pj + Vec3(nd(rng), nd(rng), nd(rng));
      if (hi.plane.contains(xi, 0.0) && hj.plane.contains(xj, 0.0))
        worst_pair = std::min(worst_pair, hi.plane.normal.dot(xj - xi));
    }
  }
  const double need = 2.0 * p.d_rad;
  report(worst_sym <= 1e-12 && worst_gap >= need - 1e-12 && worst_pair >= need - 1e-12, "perturbation-symmetry",
         fmt("10^4 normals: max |f(n)+f(-n)| %.2e, least plane gap %.4f m, least sampled gap %.4f m, need %.3f m",
             worst_sym, worst_gap, worst_pair, need));
}

void solver_oracle() {
  std::mt19937_64 rng(4242);
  int mismatched = 0, checks_failed = 0, feasible = 0;
  double worst_rel = 0.0, worst_dyn = 0.0, worst_corr = 0.0, worst_term = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = testing::random_mpc_instance(rng, 4, 3);
    MpcProblem problem(inst.tasc, inst.x0, inst.ref, inst.limits, inst.weights, inst.h);
    const auto bb = problem.solve_miqp();
    MiqpOptions all;
    all.exhaustive = true;
    const auto en = problem.solve_miqp(all);
    if ((bb.status == SolveStatus::Optimal) != (en.status == SolveStatus::Optimal)) {
      ++mismatched;
      continue;
    }
    if (bb.status != SolveStatus::Optimal) continue;
    ++feasible;
    const double rel = std::abs(bb.solution.cost - en.solution.cost) / std::max(1.0, std::abs(en.solution.cost));
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-6) ++mismatched;
    for (const auto* out : {&bb, &en}) {
      DiscreteTrajectory traj;
      traj.states = out->solution.states;
      traj.jerks = out->solution.jerks;
      traj.step = inst.h;
      const double dyn = dynamics_residual(traj);
      const double corr = testing::corridor_violation(inst, out->assignment, out->solution);
      const double term = std::max(traj.states.back().velocity.norm(), traj.states.back().acceleration.norm());
      worst_dyn = std::max(worst_dyn, dyn);
      worst_corr = std::max(worst_corr, corr);
      worst_term = std::max(worst_term, term);
      if (dyn > 1e-9 || corr > 1e-6 || term > 1e-6) ++checks_failed;
    }
  }
  report(mismatched == 0 && checks_failed == 0 && feasible > 0, "solver-oracle",
         fmt("200 instances (%d feasible): worst relative gap %.1e, residuals dyn %.1e corridor %.1e terminal %.1e",
             feasible, worst_rel, worst_dyn, worst_corr, worst_term));
}

void path_search_oracle() {
  std::mt19937 rng(7);
  const Index3 shapes[] = {{12, 12, 1}, {10, 10, 4}, {8, 8, 8}, {20, 15, 5}, {30, 30, 3}};
  int compared = 0, differ = 0, disagree = 0;
  while (compared < 100) {
    VoxelGrid g(Vec3::Zero(), shapes[compared % 5], 0.3);
    std::bernoulli_distribution occ(0.05 + 0.07 * (compared % 5));
    for (std::size_t i = 0; i < g.size(); ++i)
      if (occ(rng)) g.set(g.unlinear(i), Occupancy::Occupied);
    std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
    auto free_cell = [&] {
      while (true)
        if (const Index3 c = g.unlinear(pick(rng)); g.is_free(c)) return c;
    };
    const Index3 s = free_cell(), t = free_cell();
    const auto a = astar_search(g, s, t);
    const auto j = jps_search(g, s, t);
    if (a.has_value() != j.has_value()) ++disagree;
    if (!a || !j) continue;
    ++compared;
    if (a->moves != j->moves) ++differ;
  }
  report(differ == 0 && disagree == 0, "path-search-oracle",
         fmt("%d grids with a path: %d cost mismatches, %d reachability disagreements", compared, differ, disagree));
}

void determinism() {
  bool same = true;
  for (const char* file : {"circle10.json", "obstacles12.json"}) {
    ScenarioConfig config = scenario(file);
    config.network.latency = 0.1;
    const Scenario sc = make_scenario(config, 3);
    const RunResult a = run_scenario(sc);
    const RunResult b = run_scenario(sc);
    same = same && a.trajectory_csv == b.trajectory_csv && a.decision_log == b.decision_log;
  }
  report(same, "determinism", "circle10 and obstacles12 run twice: trajectory and decision logs identical");
}

void measured_compute_time() {
  ScenarioConfig config = scenario("circle10.json");
  config.compute.mode = ComputeMode::Measured;
  const RunResult r = run_scenario(make_scenario(config, 0));
  double sum = 0.0, worst = 0.0;
  long n = 0;
  for (const auto& a : r.metrics.agents)
    for (double t : a.compute_times) {
      sum += t;
      worst = std::max(worst, t);
      ++n;
    }
  const double mean = n ? sum / n : 0.0;
  report(n > 0 && mean < 0.05, "compute-time",
         fmt("measured mode, %ld plans: mean %.1f ms, max %.1f ms", n, mean * 1e3, worst * 1e3));
}

}  // namespace

int main() {
  perturbation_symmetry();
  solver_oracle();
  path_search_oracle();
  determinism();
  measured_compute_time();
  obstacle_field();
  safety_and_flight_time();
  std::printf("%s\n", failures ? "SOME TARGETS FAILED" : "ALL TARGETS MET");
  return failures ? 1 : 0;
}
