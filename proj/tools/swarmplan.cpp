#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "swarm/batch.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Run a multi-agent planning scenario and write logs and metrics."};
  std::string scenario_path;
  std::string output;
  std::optional<int> runs;
  std::optional<double> latency_ms;
  std::optional<std::uint64_t> seed;
  std::string compute_mode;
  bool quiet = false;

  app.add_option("scenario", scenario_path, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--output", output, "Output directory (default: the scenario's output_dir)");
  app.add_option("-n,--runs", runs, "Number of runs")->check(CLI::PositiveNumber);
  app.add_option("-l,--latency", latency_ms, "Default pair latency in ms")->check(CLI::NonNegativeNumber);
  app.add_option("-s,--seed", seed, "Master seed");
  app.add_option("-c,--compute-mode", compute_mode, "Planning time model")
      ->check(CLI::IsMember({"synthetic", "measured"}));
  app.add_flag("-q,--quiet", quiet, "Only print the summary");
  CLI11_PARSE(app, argc, argv);

  try {
    swarm::ScenarioConfig config = swarm::load_config(scenario_path);
    if (!output.empty()) config.output_dir = output;
    if (runs) config.runs = *runs;
    if (latency_ms) config.network.latency = *latency_ms / 1000.0;
    if (seed) config.seed = *seed;
    if (compute_mode == "synthetic") config.compute.mode = swarm::ComputeMode::Synthetic;
    if (compute_mode == "measured") config.compute.mode = swarm::ComputeMode::Measured;

    const auto batch = swarm::run_batch(config, config.output_dir, [&](int run, const swarm::MetricsReport& m) {
      if (quiet) return;
      int arrived = 0;
      for (const auto& a : m.agents) arrived += a.arrived;
      std::printf("run %3d  arrived %d/%zu  collision %d  stops %d  timeout %d  end %.2f s\n", run, arrived,
                  m.agents.size(), m.collision ? 1 : 0, m.num_stops, m.timeout ? 1 : 0, m.end_time);
      std::fflush(stdout);
    });
    std::printf("%s", swarm::format_table(config.name.empty() ? "batch" : config.name, batch.summary).c_str());
    std::printf("\nwrote %s\n", config.output_dir.c_str());
    return batch.any_collision() || batch.any_timeout() ? 1 : 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
