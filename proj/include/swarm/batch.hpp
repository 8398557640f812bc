#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swarm/config.hpp"

namespace swarm {

// Run-level numbers that get aggregated over a batch, in a fixed order.
// Per-agent quantities enter as their mean over agents.
std::vector<std::pair<std::string, double>> run_scalars(const MetricsReport& report);

// "key = value" lines, numbers printed with %.17g so they parse back exactly.
// Holds the run scalars followed by per-agent entries ("agent.3.flight_time").
std::string format_metrics(const MetricsReport& report);

// Reads a key-value document back. Blank lines and '#' comments are ignored.
// Throws std::runtime_error naming the line on malformed input.
std::map<std::string, std::string> parse_key_values(const std::string& text);

// min_x,min_y,min_z,max_x,max_y,max_z per box, with a header row.
std::string format_obstacles(const std::vector<AlignedBox>& boxes);

struct Stat {
  double mean = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // population
};

struct Aggregate {
  int runs = 0;
  double collision_percent = 0.0;
  std::vector<std::pair<std::string, Stat>> stats;  // same order as run_scalars
};

// Sums run in order, so recomputing from the same values gives the same bits.
Aggregate aggregate(const std::vector<std::vector<std::pair<std::string, double>>>& runs);

std::string format_aggregate(const Aggregate& agg);
// Markdown table, one row per metric with mean / max / std columns.
std::string format_table(const std::string& title, const Aggregate& agg);

struct BatchResult {
  std::vector<std::uint64_t> seeds;
  std::vector<MetricsReport> reports;
  Aggregate summary;

  bool any_collision() const;
  bool any_timeout() const;
};

// Runs every run of `config` in order. With `output_dir`, each run writes
// run_NNN/{trajectory.csv, decisions.log, metrics.txt, obstacles.csv} and the
// batch writes aggregate.txt and table.md. `on_run` sees each run as it ends.
BatchResult run_batch(const ScenarioConfig& config, const std::optional<std::filesystem::path>& output_dir,
                      const std::function<void(int, const MetricsReport&)>& on_run = {});

}  // namespace swarm
