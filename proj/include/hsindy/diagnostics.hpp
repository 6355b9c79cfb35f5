#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsindy/common.hpp"
#include "hsindy/dynamics.hpp"
#include "hsindy/features.hpp"
#include "hsindy/sparse_regression.hpp"

namespace hsindy {

// Relative least-squares error bound C*kappa*eps / (1 - C*kappa*eps); +inf
// once C*kappa*eps >= 1.
double ls_error_bound(double kappa, double epsilon, double constant);

// sqrt(k) * max|xi| / min nonzero |xi| for each column; nullopt for an
// all-zero column.
std::vector<std::optional<double>> threshold_success_factor(const Matrix& xi);

// ||dTheta||_2 ||X||_2 / (||Theta||_2 ||dX||_2) for one perturbation.
double perturbation_ratio(const FeatureLibrary& library, const Matrix& states,
                          const Matrix& perturbation);

// Largest perturbation_ratio over `trials` Gaussian perturbations of
// relative size `epsilon`: a Monte-Carlo stand-in for the library constant C.
double fit_perturbation_constant(const FeatureLibrary& library, const Matrix& states,
                                 double epsilon, int trials, std::uint64_t seed);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

struct SweepConfig {
  HopperParams hopper;
  FixedStepOptions simulation;
  std::vector<HopperRegime> regimes = {HopperRegime::Compression, HopperRegime::Flight};
  std::vector<Index> cluster_sizes = {10, 30, 100, 300, 1000};
  std::vector<double> noise_levels = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  int realizations = 5;
  int training_trajectories = 100;
  double y_low = 1.0, y_high = 1.5;
  double v_low = 0.0, v_high = 0.5;
  // Samples closer than this to y = 1 are left out of both regime subsets.
  double guard_margin = 0.02;
  int max_order = 2;
  std::vector<double> lambdas = default_lambda_grid();
  StlsqOptions stlsq;
  std::uint64_t seed = 7;
  unsigned jobs = 1;
};

struct SweepCell {
  std::string regime;
  Index cluster_size = 0;
  double epsilon = 0.0;
  int realizations = 0;
  int successes = 0;
  double success_fraction = 0.0;
  double kappa = 0.0;
  double kappa_eps = 0.0;
  bool skipped = false;
};

// Training data for the sweep: `training_trajectories` hopper runs from
// initial conditions drawn uniformly in the configured box.
TrajectorySet sweep_training_data(const SweepConfig& config);

// Rows of `data` used for one regime's clusters, and the seed row (highest
// flight sample, lowest compression sample).
std::vector<Index> regime_subset(const TrajectorySet& data, HopperRegime regime,
                                 double guard_margin);

std::vector<SweepCell> noise_sweep(const SweepConfig& config);

std::string regime_name(HopperRegime regime);

}  // namespace hsindy
