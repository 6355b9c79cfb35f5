#include "hsindy/pipeline.hpp"

#include <cmath>
#include <sstream>

namespace hsindy {

namespace {

Index full_dimension(SystemKind system) { return system == SystemKind::Hopper ? 2 : 3; }

std::vector<std::string> full_state_names(SystemKind system) {
  if (system == SystemKind::Hopper) return {"y", "v"};
  return {"S", "I", "R"};
}

std::vector<Index> effective_state_columns(const PipelineConfig& config) {
  if (!config.state_columns.empty()) return config.state_columns;
  std::vector<Index> all(static_cast<std::size_t>(full_dimension(config.system)));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);
  return all;
}

std::vector<Index> effective_coordinates(const PipelineConfig& config) {
  if (!config.coordinates.empty()) return config.coordinates;
  std::vector<Index> states(effective_state_columns(config).size());
  for (std::size_t i = 0; i < states.size(); ++i) states[i] = static_cast<Index>(i);
  return states;
}

TrajectorySet simulate_one(const PipelineConfig& config, const std::vector<double>& ic,
                           std::uint64_t perturbation_seed) {
  if (config.system == SystemKind::Hopper) {
    return simulate_hopper({ic[0], ic[1]}, config.hopper, config.hopper_simulation);
  }
  return simulate_sir({ic[0], ic[1], ic[2]}, config.sir, config.calendar, config.sir_simulation,
                      perturbation_seed);
}

TrajectorySet simulate_list(const PipelineConfig& config,
                            const std::vector<std::vector<double>>& ics, std::size_t offset) {
  std::vector<TrajectorySet> parts(ics.size());
  parallel_for(ics.size(), config.jobs, [&](std::size_t i) {
    parts[i] = simulate_one(config, ics[i],
                            derive_seed(config.seed, streams::kSirPerturbation, offset + i));
  });
  return concatenate(parts);
}

}  // namespace

void PipelineConfig::validate() const {
  const Index n = full_dimension(system);
  auto check_ics = [&](const std::vector<std::vector<double>>& ics, const char* name) {
    if (ics.empty()) throw ConfigError(std::string(name) + ": at least one initial condition required");
    for (const auto& ic : ics) {
      if (static_cast<Index>(ic.size()) != n) {
        throw ConfigError(std::string(name) + ": each initial condition needs " +
                          std::to_string(n) + " values");
      }
      for (double v : ic) {
        if (!std::isfinite(v)) throw ConfigError(std::string(name) + ": non-finite value");
      }
    }
  };
  check_ics(training_ics, "training_ics");
  check_ics(validation_ics, "validation_ics");

  for (Index c : state_columns) {
    if (c < 0 || c >= n) throw ConfigError("state_columns: index out of range");
  }
  const auto regressed = static_cast<Index>(effective_state_columns(*this).size());
  for (Index c : coordinates) {
    if (c < 0 || c >= 2 * regressed) throw ConfigError("coordinates: index out of range");
  }
  if (K < 1) throw ConfigError("K must be >= 1");
  if (q < 1) throw ConfigError("q must be >= 1");
  if (max_order < 0) throw ConfigError("max_order must be >= 0");
  if (lambdas.empty()) throw ConfigError("lambdas must be non-empty");
  for (double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambdas must be finite and >= 0");
  }
  if (stlsq.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(threshold > 0.0)) throw ConfigError("threshold must be > 0");
  if (!(noise >= 0.0)) throw ConfigError("noise epsilon must be >= 0");
  if (!(min_switch_improvement >= 0.0 && min_switch_improvement <= 1.0)) {
    throw ConfigError("min_switch_improvement must lie in [0, 1]");
  }
  if (!(blowup_norm > 0.0)) throw ConfigError("blowup_norm must be > 0");

  if (system == SystemKind::Hopper) {
    if (!(hopper.kappa > 0.0)) throw ConfigError("hopper.kappa must be > 0");
    if (!(hopper_simulation.dt > 0.0)) throw ConfigError("hopper.dt must be > 0");
    if (!(hopper_simulation.t_end > 0.0)) throw ConfigError("hopper.t_end must be > 0");
    if (hopper_simulation.substeps < 1) throw ConfigError("hopper.substeps must be >= 1");
  } else {
    if (sir_simulation.years < 1) throw ConfigError("sir.years must be >= 1");
    if (sir_simulation.substeps < 1) throw ConfigError("sir.substeps must be >= 1");
    if (!(sir_simulation.record_step > 0.0)) throw ConfigError("sir.record_step must be > 0");
    if (!(sir.N > 0.0)) throw ConfigError("sir.N must be > 0");
    try {
      calendar.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("sir.calendar: ") + e.what());
    }
    for (const auto* list : {&training_ics, &validation_ics}) {
      for (const auto& ic : *list) {
        const double total = ic[0] + ic[1] + ic[2];
        if (std::abs(total - sir.N) > 1e-9 * sir.N) {
          throw ConfigError("SIR initial conditions must sum to N");
        }
      }
    }
  }
}

double PipelineConfig::sample_step() const {
  return system == SystemKind::Hopper ? hopper_simulation.dt : sir_simulation.record_step;
}

int PipelineConfig::integration_substeps() const {
  return system == SystemKind::Hopper ? hopper_simulation.substeps : sir_simulation.substeps;
}

std::vector<std::string> PipelineConfig::state_names() const {
  const auto all = full_state_names(system);
  std::vector<std::string> out;
  for (Index c : effective_state_columns(*this)) out.push_back(all[static_cast<std::size_t>(c)]);
  return out;
}

SplitData split(const PipelineConfig& config) {
  config.validate();
  SplitData out;
  for (std::size_t i = 0; i < config.training_ics.size(); ++i) {
    for (std::size_t j = 0; j < config.validation_ics.size(); ++j) {
      if (config.training_ics[i] == config.validation_ics[j]) {
        std::ostringstream msg;
        msg << "training initial condition " << i << " equals validation initial condition " << j;
        out.warnings.push_back(msg.str());
      }
    }
  }
  out.training = simulate_list(config, config.training_ics, 0);
  out.validation = simulate_list(config, config.validation_ics, config.training_ics.size());
  return out;
}

SplitData prepare_data(const PipelineConfig& config) {
  SplitData data = split(config);
  if (config.noise > 0.0) {
    data.training = add_noise(data.training, config.noise,
                              derive_seed(config.seed, streams::kTrainingNoise));
    if (config.noise_validation) {
      data.validation = add_noise(data.validation, config.noise,
                                  derive_seed(config.seed, streams::kValidationNoise));
    }
  }
  const auto columns = effective_state_columns(config);
  data.training = data.training.select_states(columns);
  data.validation = data.validation.select_states(columns);
  return data;
}

Index PipelineResult::unresolved_count() const {
  Index count = 0;
  for (const auto& row : regime_map) {
    if (!row.resolved) ++count;
  }
  return count;
}

ClusterOutcome process_anchor(const PipelineConfig& config, const FeatureLibrary& library,
                              const TrajectorySet& training, const TrajectorySet& validation,
                              const Matrix& theta, const Matrix& train_coordinates,
                              const Matrix& validation_coordinates, Index anchor) {
  ClusterOutcome outcome;
  outcome.cluster = build_cluster(train_coordinates, validation_coordinates, anchor, config.K);
  const auto& members = outcome.cluster.train;
  const Index count = static_cast<Index>(members.size());
  Matrix theta_c(count, theta.cols());
  Matrix rhs(count, training.dimension());
  for (Index r = 0; r < count; ++r) {
    theta_c.row(r) = theta.row(members[static_cast<std::size_t>(r)]);
    rhs.row(r) = training.derivatives.row(members[static_cast<std::size_t>(r)]);
  }
  outcome.condition_number = condition_number(theta_c);

  ValidationSettings settings;
  settings.q = config.q;
  settings.integration.dt = config.sample_step();
  settings.integration.substeps = config.integration_substeps();
  settings.integration.blowup_norm = config.blowup_norm;
  settings.min_switch_improvement = config.min_switch_improvement;

  for (const auto& model : lambda_sweep(theta_c, rhs, config.lambdas, config.stlsq)) {
    outcome.scored.push_back(validate_model(model, library, validation, outcome.cluster, settings));
  }
  assign_relative_aicc(outcome.scored);
  outcome.retained = rank_and_filter(outcome.scored, config.threshold);
  return outcome;
}

PipelineResult run(const PipelineConfig& config) {
  PipelineResult result;
  result.data = prepare_data(config);
  const TrajectorySet& training = result.data.training;
  const TrajectorySet& validation = result.data.validation;

  if (config.K > training.rows() || config.K > validation.rows()) {
    throw ConfigError("K exceeds the number of training or validation samples");
  }

  const auto names = config.state_names();
  auto library = std::make_shared<const FeatureLibrary>(static_cast<int>(names.size()),
                                                        config.max_order, names);
  result.library = library;
  for (const auto& name : names) result.equation_names.push_back("d" + name);

  const auto coordinates = effective_coordinates(config);
  result.train_coordinates = select_coordinates(training, coordinates);
  result.validation_coordinates = select_coordinates(validation, coordinates);
  if (config.standardize) {
    standardize_coordinates(result.train_coordinates, result.validation_coordinates);
  }

  const Matrix theta = library->evaluate(training.states);
  if (!theta.allFinite()) throw NumericalError("library evaluation produced non-finite values");

  result.outcomes.resize(static_cast<std::size_t>(training.rows()));
  parallel_for(result.outcomes.size(), config.jobs, [&](std::size_t i) {
    result.outcomes[i] =
        process_anchor(config, *library, training, validation, theta, result.train_coordinates,
                       result.validation_coordinates, static_cast<Index>(i));
    for (auto& scored : result.outcomes[i].scored) scored.model.library = library;
    for (auto& scored : result.outcomes[i].retained) scored.model.library = library;
  });

  for (const auto& outcome : result.outcomes) {
    result.catalog.register_models(outcome.cluster.anchor, outcome.retained);
  }
  result.regime_map =
      regime_map(result.catalog, result.outcomes, training, result.train_coordinates);
  return result;
}

}  // namespace hsindy
