#include "hsindy/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "hsindy/clustering.hpp"

namespace hsindy {

namespace {

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double ls_error_bound(double kappa, double epsilon, double constant) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("condition number must be >= 1");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("noise level must be >= 0");
  if (!(constant > 0.0)) throw std::invalid_argument("library constant must be > 0");
  const double x = constant * kappa * epsilon;
  if (x >= 1.0) return std::numeric_limits<double>::infinity();
  return x / (1.0 - x);
}

std::vector<std::optional<double>> threshold_success_factor(const Matrix& xi) {
  std::vector<std::optional<double>> out;
  for (Index j = 0; j < xi.cols(); ++j) {
    double largest = 0.0;
    double smallest = std::numeric_limits<double>::infinity();
    Index k = 0;
    for (Index l = 0; l < xi.rows(); ++l) {
      const double v = std::abs(xi(l, j));
      if (v == 0.0) continue;
      ++k;
      largest = std::max(largest, v);
      smallest = std::min(smallest, v);
    }
    if (k == 0) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(std::sqrt(static_cast<double>(k)) * largest / smallest);
    }
  }
  return out;
}

double perturbation_ratio(const FeatureLibrary& library, const Matrix& states,
                          const Matrix& perturbation) {
  const Matrix theta = library.evaluate(states);
  const Matrix delta_theta = library.evaluate(states + perturbation) - theta;
  return spectral_norm(delta_theta) * spectral_norm(states) /
         (spectral_norm(theta) * spectral_norm(perturbation));
}

double fit_perturbation_constant(const FeatureLibrary& library, const Matrix& states,
                                 double epsilon, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  if (!(epsilon > 0.0)) throw std::invalid_argument("perturbation size must be > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double target = epsilon * spectral_norm(states);
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    Matrix delta(states.rows(), states.cols());
    for (Index i = 0; i < delta.size(); ++i) delta.data()[i] = normal(rng);
    delta *= target / spectral_norm(delta);
    best = std::max(best, perturbation_ratio(library, states, delta));
  }
  return best;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("spearman needs two equal-length samples of size >= 2");
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - mean) * (rb[i] - mean);
    va += (ra[i] - mean) * (ra[i] - mean);
    vb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

std::string regime_name(HopperRegime regime) {
  return regime == HopperRegime::Compression ? "compression" : "flight";
}

TrajectorySet sweep_training_data(const SweepConfig& config) {
  if (config.training_trajectories < 1) throw std::invalid_argument("sweep needs training trajectories");
  std::vector<TrajectorySet> parts(static_cast<std::size_t>(config.training_trajectories));
  parallel_for(parts.size(), config.jobs, [&](std::size_t i) {
    std::mt19937_64 rng(derive_seed(config.seed, streams::kSweepInitialConditions, i));
    std::uniform_real_distribution<double> y(config.y_low, config.y_high);
    std::uniform_real_distribution<double> v(config.v_low, config.v_high);
    const double y0 = y(rng);
    const double v0 = v(rng);
    parts[i] = simulate_hopper({y0, v0}, config.hopper, config.simulation);
  });
  return concatenate(parts);
}

std::vector<Index> regime_subset(const TrajectorySet& data, HopperRegime regime,
                                 double guard_margin) {
  std::vector<Index> rows;
  for (Index i = 0; i < data.rows(); ++i) {
    if (data.regime_labels[i] != static_cast<int>(regime)) continue;
    if (std::abs(data.states(i, 0) - 1.0) <= guard_margin) continue;
    rows.push_back(i);
  }
  return rows;
}

std::vector<SweepCell> noise_sweep(const SweepConfig& config) {
  if (config.cluster_sizes.empty() || config.noise_levels.empty() || config.regimes.empty()) {
    throw std::invalid_argument("sweep grids must be non-empty");
  }
  if (config.realizations < 1) throw std::invalid_argument("sweep needs realizations >= 1");

  const TrajectorySet data = sweep_training_data(config);
  const FeatureLibrary library(2, config.max_order, {"y", "v"});

  struct Job {
    std::size_t regime_index;
    std::size_t size_index;
    std::size_t noise_index;
  };
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < config.regimes.size(); ++r)
    for (std::size_t k = 0; k < config.cluster_sizes.size(); ++k)
      for (std::size_t e = 0; e < config.noise_levels.size(); ++e) jobs.push_back({r, k, e});

  // Per regime: subset rows and the seed sample.
  struct RegimeData {
    std::vector<Index> rows;
    Matrix coordinates;
    Index seed_position = -1;
    SupportSignature truth;
  };
  std::vector<RegimeData> regimes;
  for (HopperRegime regime : config.regimes) {
    RegimeData rd;
    rd.rows = regime_subset(data, regime, config.guard_margin);
    rd.coordinates.resize(static_cast<Index>(rd.rows.size()), 2);
    for (std::size_t i = 0; i < rd.rows.size(); ++i) {
      rd.coordinates.row(static_cast<Index>(i)) = data.states.row(rd.rows[i]);
    }
    if (!rd.rows.empty()) {
      Index best = 0;
      for (Index i = 1; i < rd.coordinates.rows(); ++i) {
        const bool better = regime == HopperRegime::Flight
                                ? rd.coordinates(i, 0) > rd.coordinates(best, 0)
                                : rd.coordinates(i, 0) < rd.coordinates(best, 0);
        if (better) best = i;
      }
      rd.seed_position = best;
    }
    rd.truth = SupportSignature::of_coefficients(hopper_true_coefficients(config.hopper, regime));
    regimes.push_back(std::move(rd));
  }

  std::vector<SweepCell> cells(jobs.size());
  parallel_for(jobs.size(), config.jobs, [&](std::size_t j) {
    const Job& job = jobs[j];
    const RegimeData& rd = regimes[job.regime_index];
    SweepCell& cell = cells[j];
    cell.regime = regime_name(config.regimes[job.regime_index]);
    cell.cluster_size = config.cluster_sizes[job.size_index];
    cell.epsilon = config.noise_levels[job.noise_index];
    cell.realizations = config.realizations;
    if (rd.seed_position < 0 || cell.cluster_size > rd.coordinates.rows()) {
      cell.skipped = true;
      cell.kappa = std::numeric_limits<double>::quiet_NaN();
      cell.kappa_eps = std::numeric_limits<double>::quiet_NaN();
      cell.success_fraction = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    const auto members = nearest_rows(rd.coordinates, rd.coordinates.row(rd.seed_position),
                                      cell.cluster_size, rd.seed_position);
    Matrix states(cell.cluster_size, 2);
    Matrix derivatives(cell.cluster_size, 2);
    for (Index i = 0; i < cell.cluster_size; ++i) {
      states.row(i) = data.states.row(rd.rows[members[i]]);
      derivatives.row(i) = data.derivatives.row(rd.rows[members[i]]);
    }
    cell.kappa = condition_number(library.evaluate(states));
    cell.kappa_eps = cell.kappa * cell.epsilon;

    for (int r = 0; r < config.realizations; ++r) {
      const std::uint64_t index =
          ((job.regime_index * 1000 + job.size_index) * 1000 + job.noise_index) * 100000 +
          static_cast<std::uint64_t>(r);
      std::mt19937_64 rng(derive_seed(config.seed, streams::kSweepNoise, index));
      std::normal_distribution<double> normal(0.0, cell.epsilon);
      Matrix noisy = states;
      for (Index i = 0; i < noisy.size(); ++i) noisy.data()[i] += normal(rng);
      const Matrix theta = library.evaluate(noisy);
      bool success = false;
      for (double lambda : config.lambdas) {
        if (stlsq(theta, derivatives, lambda, config.stlsq).signature() == rd.truth) {
          success = true;
          break;
        }
      }
      if (success) ++cell.successes;
    }
    cell.success_fraction =
        static_cast<double>(cell.successes) / static_cast<double>(cell.realizations);
  });
  return cells;
}

}  // namespace hsindy
