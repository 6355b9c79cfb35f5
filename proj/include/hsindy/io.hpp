#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hsindy/diagnostics.hpp"
#include "hsindy/dynamics.hpp"
#include "hsindy/pipeline.hpp"

namespace hsindy {

inline constexpr const char* kVersion = "0.1.0";

// Which experiment a config file describes.
enum class ConfigKind { Pipeline, Sweep };

// A parsed config document. `canonical` is the compact, key-sorted JSON
// of the effective settings (after overrides); `hash` is its FNV-1a digest.
struct LoadedConfig {
  ConfigKind kind = ConfigKind::Pipeline;
  PipelineConfig pipeline;
  SweepConfig sweep;
  std::string canonical;
  std::uint64_t hash = 0;
};

// Parses JSON (comments allowed). Throws ConfigError naming the offending
// field, or the line and column of a syntax error.
LoadedConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed_override = {},
                          std::optional<unsigned> jobs_override = {});
LoadedConfig load_config(const std::filesystem::path& path,
                         std::optional<std::uint64_t> seed_override = {},
                         std::optional<unsigned> jobs_override = {});

std::uint64_t fnv1a(const std::string& bytes);

// %.17g, with "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double value);

// traj_id,t,x1..xn,dx1..dxn,regime_label for the rows of trajectory `traj`,
// or for every row when traj is negative.
void write_trajectory_csv(std::ostream& out, const TrajectorySet& set, Index traj = -1);

// JSON document of the catalog: library terms, then entries in rank order.
std::string catalog_json(const ModelCatalog& catalog, const FeatureLibrary& library,
                         const std::vector<std::string>& equation_names, Index anchors);

void write_regime_map_csv(std::ostream& out, const std::vector<RegimeMapRow>& rows,
                          const FeatureLibrary& library,
                          const std::vector<std::string>& equation_names);

// anchor_index,model_signature,k,aicc,rel_aicc over every scored model.
void write_scoreboard_csv(std::ostream& out, const std::vector<ClusterOutcome>& outcomes);

// regime,K,epsilon,kappa,kappa_eps,success_fraction
void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);

struct RunManifest {
  std::string command;
  std::string version = kVersion;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> files;

  std::string to_json() const;
};

// UTC timestamp, ISO 8601.
std::string utc_now();

// Writes `content` to dir/name and records the name in the manifest.
void write_file(const std::filesystem::path& dir, const std::string& name,
                const std::string& content, RunManifest& manifest);

}  // namespace hsindy
