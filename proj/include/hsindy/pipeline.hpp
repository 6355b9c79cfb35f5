#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hsindy/catalog.hpp"
#include "hsindy/clustering.hpp"
#include "hsindy/common.hpp"
#include "hsindy/dynamics.hpp"
#include "hsindy/features.hpp"
#include "hsindy/model_selection.hpp"
#include "hsindy/sparse_regression.hpp"

namespace hsindy {

enum class SystemKind { Hopper, Sir };

struct PipelineConfig {
  SystemKind system = SystemKind::Hopper;

  HopperParams hopper;
  FixedStepOptions hopper_simulation;

  SirParams sir;
  SirCalendar calendar = SirCalendar::school_year();
  SirOptions sir_simulation;

  std::vector<std::vector<double>> training_ics;
  std::vector<std::vector<double>> validation_ics;

  // State columns entering the regression (empty: all of them).
  std::vector<Index> state_columns;
  // Clustering coordinates as indices into [X X'] of the regressed states
  // (empty: the states themselves).
  std::vector<Index> coordinates;
  bool standardize = false;

  Index K = 30;
  Index q = 10;
  int max_order = 2;
  std::vector<double> lambdas = default_lambda_grid();
  StlsqOptions stlsq;
  double threshold = 3.0;
  double min_switch_improvement = 0.1;
  double blowup_norm = 1e6;

  double noise = 0.0;
  bool noise_validation = false;

  std::uint64_t seed = 1;
  unsigned jobs = 1;

  // Throws ConfigError on an inconsistent configuration.
  void validate() const;
  // Sampling step of the generated data; also the model simulation step.
  double sample_step() const;
  int integration_substeps() const;
  std::vector<std::string> state_names() const;
};

struct SplitData {
  TrajectorySet training;
  TrajectorySet validation;
  std::vector<std::string> warnings;
};

// Simulates the training and validation initial conditions. Identical
// initial conditions in both lists are reported in `warnings`.
SplitData split(const PipelineConfig& config);

// split, then measurement noise on the states, then column selection: the
// data exactly as the identification step sees it.
SplitData prepare_data(const PipelineConfig& config);

struct PipelineResult {
  SplitData data;
  std::shared_ptr<const FeatureLibrary> library;
  std::vector<std::string> equation_names;
  Matrix train_coordinates;
  Matrix validation_coordinates;
  std::vector<ClusterOutcome> outcomes;  // one per training row, in row order
  ModelCatalog catalog;
  std::vector<RegimeMapRow> regime_map;

  Index unresolved_count() const;
};

PipelineResult run(const PipelineConfig& config);

// Cluster, fit, validate and rank for a single anchor.
ClusterOutcome process_anchor(const PipelineConfig& config, const FeatureLibrary& library,
                              const TrajectorySet& training, const TrajectorySet& validation,
                              const Matrix& theta, const Matrix& train_coordinates,
                              const Matrix& validation_coordinates, Index anchor);

}  // namespace hsindy
