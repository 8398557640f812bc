#include "swarm/batch.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace swarm {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

std::vector<std::pair<std::string, double>> run_scalars(const MetricsReport& r) {
  const double n = r.agents.empty() ? 1.0 : static_cast<double>(r.agents.size());
  double flight = 0.0, distance = 0.0, speed = 0.0, accel = 0.0, jerk = 0.0, arrived = 0.0;
  double compute_sum = 0.0, compute_max = 0.0;
  long compute_n = 0, plans = 0, skips = 0, recommits = 0;
  for (const auto& a : r.agents) {
    flight += a.flight_time;
    distance += a.distance;
    speed += a.mean_speed;
    accel += a.accel_cost;
    jerk += a.jerk_cost;
    arrived += a.arrived ? 1.0 : 0.0;
    plans += a.plans;
    skips += a.skips;
    recommits += a.recommits;
    for (double c : a.compute_times) {
      compute_sum += c;
      compute_max = std::max(compute_max, c);
      ++compute_n;
    }
  }
  const double min_pair = std::isfinite(r.min_pair_distance) ? r.min_pair_distance : -1.0;
  return {
      {"collision", r.collision ? 1.0 : 0.0},
      {"violation_samples", static_cast<double>(r.violation_samples)},
      {"min_pair_distance", min_pair},
      {"timeout", r.timeout ? 1.0 : 0.0},
      {"stops", static_cast<double>(r.num_stops)},
      {"arrived_fraction", arrived / n},
      {"flight_time", flight / n},
      {"distance", distance / n},
      {"mean_speed", speed / n},
      {"accel_cost", accel / n},
      {"jerk_cost", jerk / n},
      {"compute_time_mean", compute_n ? compute_sum / static_cast<double>(compute_n) : 0.0},
      {"compute_time_max", compute_max},
      {"plans", static_cast<double>(plans)},
      {"skips", static_cast<double>(skips)},
      {"recommits", static_cast<double>(recommits)},
      {"end_time", r.end_time},
      {"dynamics_residual", r.dynamics_residual},
  };
}

std::string format_metrics(const MetricsReport& r) {
  std::string out;
  for (const auto& [key, value] : run_scalars(r)) out += key + " = " + num(value) + "\n";
  out += "agents = " + std::to_string(r.agents.size()) + "\n";
  for (std::size_t i = 0; i < r.agents.size(); ++i) {
    const AgentMetrics& a = r.agents[i];
    const std::string p = "agent." + std::to_string(i) + ".";
    out += p + "arrived = " + (a.arrived ? "1" : "0") + "\n";
    out += p + "flight_time = " + num(a.flight_time) + "\n";
    out += p + "distance = " + num(a.distance) + "\n";
    out += p + "mean_speed = " + num(a.mean_speed) + "\n";
    out += p + "accel_cost = " + num(a.accel_cost) + "\n";
    out += p + "jerk_cost = " + num(a.jerk_cost) + "\n";
    out += p + "stops = " + std::to_string(a.stops) + "\n";
    out += p + "plans = " + std::to_string(a.plans) + "\n";
    out += p + "skips = " + std::to_string(a.skips) + "\n";
    out += p + "recommits = " + std::to_string(a.recommits) + "\n";
    std::string times;
    for (std::size_t j = 0; j < a.compute_times.size(); ++j) times += (j ? "," : "") + num(a.compute_times[j]);
    out += p + "compute_times = " + times + "\n";
  }
  return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  for (int row = 1; std::getline(in, line); ++row) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw std::runtime_error("line " + std::to_string(row) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw std::runtime_error("line " + std::to_string(row) + ": empty key");
    if (!out.emplace(key, trim(t.substr(eq + 1))).second)
      throw std::runtime_error("line " + std::to_string(row) + ": duplicate key " + key);
  }
  return out;
}

std::string format_obstacles(const std::vector<AlignedBox>& boxes) {
  std::string out = "min_x,min_y,min_z,max_x,max_y,max_z\n";
  for (const auto& b : boxes)
    out += num(b.min.x()) + "," + num(b.min.y()) + "," + num(b.min.z()) + "," + num(b.max.x()) + "," +
           num(b.max.y()) + "," + num(b.max.z()) + "\n";
  return out;
}

Aggregate aggregate(const std::vector<std::vector<std::pair<std::string, double>>>& runs) {
  Aggregate agg;
  agg.runs = static_cast<int>(runs.size());
  if (runs.empty()) return agg;
  const double n = static_cast<double>(runs.size());
  for (std::size_t m = 0; m < runs.front().size(); ++m) {
    Stat s;
    s.max = runs.front()[m].second;
    double sum = 0.0;
    for (const auto& run : runs) {
      if (run.size() != runs.front().size() || run[m].first != runs.front()[m].first)
        throw std::invalid_argument("aggregate: runs report different metrics");
      sum += run[m].second;
      s.max = std::max(s.max, run[m].second);
    }
    s.mean = sum / n;
    double sq = 0.0;
    for (const auto& run : runs) sq += (run[m].second - s.mean) * (run[m].second - s.mean);
    s.stddev = std::sqrt(sq / n);
    agg.stats.emplace_back(runs.front()[m].first, s);
    if (runs.front()[m].first == "collision") agg.collision_percent = 100.0 * s.mean;
  }
  return agg;
}

std::string format_aggregate(const Aggregate& agg) {
  std::string out = "runs = " + std::to_string(agg.runs) + "\n";
  out += "collision_percent = " + num(agg.collision_percent) + "\n";
  for (const auto& [key, s] : agg.stats) {
    out += key + ".mean = " + num(s.mean) + "\n";
    out += key + ".max = " + num(s.max) + "\n";
    out += key + ".std = " + num(s.stddev) + "\n";
  }
  return out;
}

std::string format_table(const std::string& title, const Aggregate& agg) {
  char buf[160];
  std::string out = "## " + title + "\n\n";
  std::snprintf(buf, sizeof buf, "%d runs, collisions in %.1f%% of them\n\n", agg.runs, agg.collision_percent);
  out += buf;
  out += "| metric | mean | max | std |\n|---|---:|---:|---:|\n";
  for (const auto& [key, s] : agg.stats) {
    std::snprintf(buf, sizeof buf, "| %s | %.4g | %.4g | %.4g |\n", key.c_str(), s.mean, s.max, s.stddev);
    out += buf;
  }
  return out;
}

bool BatchResult::any_collision() const {
  for (const auto& r : reports)
    if (r.collision) return true;
  return false;
}

bool BatchResult::any_timeout() const {
  for (const auto& r : reports)
    if (r.timeout) return true;
  return false;
}

BatchResult run_batch(const ScenarioConfig& config, const std::optional<std::filesystem::path>& output_dir,
                      const std::function<void(int, const MetricsReport&)>& on_run) {
  if (config.runs < 1) throw ConfigError("runs: must be at least 1");
  BatchResult batch;
  std::vector<std::vector<std::pair<std::string, double>>> scalars;
  if (output_dir) std::filesystem::create_directories(*output_dir);
  for (int run = 0; run < config.runs; ++run) {
    const Scenario scenario = make_scenario(config, run);
    RunResult result = run_scenario(scenario);
    if (output_dir) {
      char name[32];
      std::snprintf(name, sizeof name, "run_%03d", run);
      const auto dir = *output_dir / name;
      std::filesystem::create_directories(dir);
      write_file(dir / "trajectory.csv", result.trajectory_csv);
      write_file(dir / "decisions.log", result.decision_log);
      write_file(dir / "metrics.txt", "seed = " + std::to_string(run_seed(config.seed, run)) + "\n" +
                                          format_metrics(result.metrics));
      write_file(dir / "obstacles.csv", format_obstacles(scenario.world.obstacles));
    }
    if (on_run) on_run(run, result.metrics);
    scalars.push_back(run_scalars(result.metrics));
    batch.seeds.push_back(run_seed(config.seed, run));
    batch.reports.push_back(std::move(result.metrics));
  }
  batch.summary = aggregate(scalars);
  if (output_dir) {
    write_file(*output_dir / "aggregate.txt", format_aggregate(batch.summary));
    write_file(*output_dir / "table.md", format_table(config.name.empty() ? "batch" : config.name, batch.summary));
  }
  return batch;
}

}  // namespace swarm
