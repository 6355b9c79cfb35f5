// hsindy: simulate benchmark systems, identify hybrid models, run noise sweeps.
//
// Exit codes: 0 success, 1 I/O or other failure, 2 configuration error,
// 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hsindy/io.hpp"
#include "hsindy/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hsindy;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::size_t top = 5;
};

RunManifest begin(const std::string& command, const LoadedConfig& loaded, std::uint64_t seed) {
  RunManifest manifest;
  manifest.command = command;
  manifest.config_hash = loaded.hash;
  manifest.seed = seed;
  manifest.started = utc_now();
  return manifest;
}

void finish(const fs::path& dir, RunManifest& manifest, const LoadedConfig& loaded) {
  write_file(dir, "config.json", loaded.canonical + "\n", manifest);
  manifest.finished = utc_now();
  manifest.files.push_back("manifest.json");
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << manifest.to_json();
  if (!out) throw std::runtime_error("failed writing manifest.json");
}

LoadedConfig load(const Options& opts, ConfigKind expected) {
  LoadedConfig loaded = load_config(opts.config, opts.seed, opts.jobs);
  if (loaded.kind != expected) {
    throw ConfigError(expected == ConfigKind::Sweep ? "config has no 'sweep' section"
                                                    : "sweep config given to a pipeline command");
  }
  return loaded;
}

fs::path output_dir(const Options& opts) {
  fs::path dir(opts.out);
  fs::create_directories(dir);
  return dir;
}

std::string trajectory_file(const TrajectorySet& set, Index traj) {
  std::ostringstream out;
  write_trajectory_csv(out, set, traj);
  return out.str();
}

int cmd_simulate(const Options& opts) {
  const LoadedConfig loaded = load(opts, ConfigKind::Pipeline);
  const PipelineConfig& config = loaded.pipeline;
  const fs::path dir = output_dir(opts);
  RunManifest manifest = begin("simulate", loaded, config.seed);

  PipelineConfig full = config;
  full.state_columns.clear();
  const SplitData data = prepare_data(full);
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';

  for (const auto& [prefix, set] :
       {std::pair<std::string, const TrajectorySet*>{"training", &data.training},
        std::pair<std::string, const TrajectorySet*>{"validation", &data.validation}}) {
    for (Index t = 0; t < set->trajectory_count(); ++t) {
      const std::string name = prefix + "_" + std::to_string(t) + ".csv";
      write_file(dir, name, trajectory_file(*set, t), manifest);
      const Index rows = set->trajectory_end(set->trajectory_starts[static_cast<std::size_t>(t)]) -
                         set->trajectory_starts[static_cast<std::size_t>(t)];
      std::cout << name << ": " << rows << " rows\n";
    }
    for (const auto& line : set->log) std::cerr << prefix << ": " << line << '\n';
  }
  finish(dir, manifest, loaded);
  return 0;
}

int cmd_identify(const Options& opts) {
  const LoadedConfig loaded = load(opts, ConfigKind::Pipeline);
  const PipelineConfig& config = loaded.pipeline;
  const fs::path dir = output_dir(opts);
  RunManifest manifest = begin("identify", loaded, config.seed);

  const PipelineResult result = run(config);
  for (const auto& w : result.data.warnings) std::cerr << "warning: " << w << '\n';

  write_file(dir, "catalog.json",
             catalog_json(result.catalog, *result.library, result.equation_names,
                          result.data.training.rows()),
             manifest);
  std::ostringstream map;
  write_regime_map_csv(map, result.regime_map, *result.library, result.equation_names);
  write_file(dir, "regime_map.csv", map.str(), manifest);
  std::ostringstream board;
  write_scoreboard_csv(board, result.outcomes);
  write_file(dir, "scoreboard.csv", board.str(), manifest);
  finish(dir, manifest, loaded);

  std::cout << "anchors: " << result.data.training.rows()
            << "  unresolved: " << result.unresolved_count()
            << "  signatures: " << result.catalog.size() << "\n";
  std::cout << "rank  frequency  mean_aicc  model\n";
  std::size_t rank = 1;
  for (const CatalogEntry* entry : result.catalog.rank_by_frequency(opts.top)) {
    char line[64];
    std::snprintf(line, sizeof line, "%4zu  %9lld  %9.3g  ", rank++,
                  static_cast<long long>(entry->frequency()), entry->mean_aicc());
    std::cout << line << entry->signature.describe(*result.library, result.equation_names)
              << '\n';
  }
  return 0;
}

int cmd_sweep(const Options& opts) {
  const LoadedConfig loaded = load(opts, ConfigKind::Sweep);
  const fs::path dir = output_dir(opts);
  RunManifest manifest = begin("sweep", loaded, loaded.sweep.seed);

  const auto cells = noise_sweep(loaded.sweep);
  std::ostringstream csv;
  write_sweep_csv(csv, cells);
  write_file(dir, "sweep.csv", csv.str(), manifest);
  finish(dir, manifest, loaded);

  std::size_t skipped = 0;
  for (const auto& c : cells) skipped += c.skipped ? 1 : 0;
  std::cout << "cells: " << cells.size() << "  skipped: " << skipped << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid sparse identification of regime-switching dynamics"};
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "Config file (JSON, comments allowed)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", opts.seed, "Root seed (overrides the config)");
    sub->add_option("--jobs", opts.jobs, "Worker threads (0: all cores)");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "Write training and validation trajectories");
  CLI::App* identify = app.add_subcommand("identify", "Run identification and write the catalog");
  CLI::App* sweep = app.add_subcommand("sweep", "Run the cluster-size and noise sweep");
  add_common(simulate);
  add_common(identify);
  add_common(sweep);
  identify->add_option("--top", opts.top, "Signatures in the printed summary")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opts);
    if (identify->parsed()) return cmd_identify(opts);
    return cmd_sweep(opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
