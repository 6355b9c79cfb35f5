#pragma once

#include <span>
#include <vector>

#include "hsindy/clustering.hpp"
#include "hsindy/common.hpp"
#include "hsindy/dynamics.hpp"
#include "hsindy/features.hpp"
#include "hsindy/sparse_regression.hpp"

namespace hsindy {

struct IntegrationOptions {
  double dt = 0.033;
  int substeps = 10;
  double blowup_norm = 1e6;
};

struct ModelTrajectory {
  Matrix states;  // q x n; rows after a blow-up are +inf
  bool blew_up = false;
  Index valid_rows = 0;
};

// Integrates x' = Theta(x) Xi from `initial_state` for q samples (the first
// being the initial state) using the data generator's RK4 step.
ModelTrajectory simulate_model(const SparseModel& model, const FeatureLibrary& library,
                               const Vector& initial_state, Index q,
                               const IntegrationOptions& options);

// Change point of the mean of e_a = mean_l |Z(a,l) - Zv(a,l)|.
//
// The split s in [1, L) minimizing the summed within-segment squared
// deviation of e[0, s) and e[s, L) wins (lowest s on ties). If that split
// removes less than `min_improvement` of the unsplit deviation, or Z has a
// single row, L is returned.
Index detect_switch(const Matrix& simulated, const Matrix& observed,
                    double min_improvement = 0.1);

// (1/n) sum_l (1/t_s) sum_{a < t_s} (Z(a,l) - Zv(a,l))^2
double average_error(const Matrix& simulated, const Matrix& observed, Index switch_time);

struct AiccScore {
  double value = 0.0;
  bool degenerate = false;  // K - k - 2 <= 0
  bool rss_floored = false;
};

inline constexpr double kRssFloor = 1e-300;

// AIC = K ln(RSS / K) + 2k, AICc = AIC + 2(k+1)(k+2)/(K-k-2).
AiccScore aicc_from_rss(double rss, Index k, Index sample_count);

// RSS is the sum of the per-initial-condition errors; K is their count.
AiccScore score_aicc(std::span<const double> errors, Index k);

struct ScoredModel {
  SparseModel model;
  std::vector<double> errors;        // E_avg per validation initial condition
  std::vector<Index> switch_times;   // t_s per validation initial condition
  double aicc = 0.0;
  double rel_aicc = 0.0;
  Index anchor = 0;
  bool degenerate = false;
  bool rss_floored = false;
  bool blew_up = false;
};

struct ValidationSettings {
  Index q = 10;
  IntegrationOptions integration;
  double min_switch_improvement = 0.1;
};

// Simulates `model` from each validation row of `cluster` and scores it.
ScoredModel validate_model(const SparseModel& model, const FeatureLibrary& library,
                           const TrajectorySet& validation, const ClusterPair& cluster,
                           const ValidationSettings& settings);

// Sets rel_aicc = aicc - min(aicc) on every model in place (all +inf when no
// finite score exists).
void assign_relative_aicc(std::span<ScoredModel> scored);

// Models with rel_aicc < threshold, ascending in aicc. Empty when no model
// has a finite score.
std::vector<ScoredModel> rank_and_filter(std::vector<ScoredModel> scored,
                                         double threshold = 3.0);

// Everything the pipeline learns about one anchor.
struct ClusterOutcome {
  ClusterPair cluster;
  std::vector<ScoredModel> scored;    // all candidates, rel_aicc assigned
  std::vector<ScoredModel> retained;  // supported subset, best first
  double condition_number = 0.0;
};

}  // namespace hsindy
