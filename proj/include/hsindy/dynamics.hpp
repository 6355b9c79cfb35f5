#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hsindy/common.hpp"

namespace hsindy {

// Time-stamped samples of one or more concatenated trajectories.
//
// Row i of `states` is x(t_i) and row i of `derivatives` is the active
// chart's vector field at the noiseless x(t_i). `regime_labels` carries the
// ground-truth chart id and exists for evaluation only; identification code
// never reads it.
struct TrajectorySet {
  std::vector<double> times;
  Matrix states;
  Matrix derivatives;
  std::vector<Index> trajectory_starts;
  std::vector<int> regime_labels;
  std::vector<std::string> log;

  Index rows() const { return states.rows(); }
  Index dimension() const { return states.cols(); }
  Index trajectory_count() const {
    return static_cast<Index>(trajectory_starts.size());
  }
  Index trajectory_of(Index row) const;
  // One past the last row of the trajectory containing `row`.
  Index trajectory_end(Index row) const;

  // Keeps only the listed state columns (and the matching derivative columns).
  TrajectorySet select_states(std::span<const Index> columns) const;

  // Throws std::invalid_argument when the shape invariants do not hold.
  void validate() const;
};

TrajectorySet concatenate(std::span<const TrajectorySet> parts);

// Descriptive record of a hybrid benchmark: its charts, the kind of guard
// that switches between them, and the parameter values in use.
enum class GuardKind { State, Time };

struct Chart {
  int label;
  std::string name;
  std::string field;
};

struct HybridSystem {
  std::string name;
  GuardKind guard;
  std::string guard_description;
  std::vector<Chart> charts;
  std::map<std::string, double> parameters;
};

// ---------------------------------------------------------------------------
// Spring-mass hopper, nondimensional, state (y, y').

enum class HopperRegime : int { Compression = 0, Flight = 1 };

// The compression chart can be written two ways; see README.
//   AsPrinted:   y'' = 1 - kappa (y - 1)
//   GravityDown: y'' = -kappa (y - 1) - 1
enum class CompressionForm { AsPrinted, GravityDown };

struct HopperParams {
  double kappa = 10.0;
  CompressionForm form = CompressionForm::AsPrinted;
};

struct FixedStepOptions {
  double dt = 0.033;
  double t_end = 5.0;
  int substeps = 10;
  double guard_tolerance = 1e-10;
};

struct HopperEvent {
  double time;
  double y;
  double velocity;
  HopperRegime entered;
};

HybridSystem hopper_system(const HopperParams& params);

// Vector field of the given chart at (y, v).
Eigen::Vector2d hopper_field(const HopperParams& params, HopperRegime regime,
                             const Eigen::Vector2d& state);

// True coefficient matrix (6 x 2, order-2 library over (y, v)) of a chart.
Matrix hopper_true_coefficients(const HopperParams& params,
                                HopperRegime regime);

// Fixed-step RK4 with bisection to the y = 1 guard. Samples are taken at
// i * dt for i = 0 .. floor(t_end / dt). Throws NumericalError on
// divergence and std::invalid_argument on bad step settings.
TrajectorySet simulate_hopper(const Eigen::Vector2d& initial_state,
                              const HopperParams& params,
                              const FixedStepOptions& options,
                              std::vector<HopperEvent>* events = nullptr);

// ---------------------------------------------------------------------------
// SIR with school-calendar transmission, state (S, I, R).

enum class SirRegime : int { Break = 0, Session = 1 };

struct SirCalendar {
  struct Period {
    double start;
    double end;
    bool in_session;
  };
  std::vector<Period> periods;
  double year_length = 365.0;

  // Winter break, spring term, summer break, fall term.
  static SirCalendar school_year();

  void validate() const;
  bool in_session(double t) const;
  // Smallest period boundary strictly greater than t (in absolute days).
  double next_boundary(double t) const;
};

struct SirParams {
  double nu = 1.0 / 365.0;
  double d = 1.0 / 365.0;
  double N = 1000.0;
  double gamma = 1.0 / 5.0;
  double beta_hat = 9.336;
  double b = 0.8;
};

struct SirOptions {
  int years = 5;
  double record_step = 1.0;
  int substeps = 10;
  bool perturb = true;
  int perturbation_amplitude = 2;
};

HybridSystem sir_system(const SirParams& params);

double beta_of_t(double t, double beta_hat, double b,
                 const SirCalendar& calendar);

Eigen::Vector3d sir_field(const SirParams& params, double beta,
                          const Eigen::Vector3d& state);

// True (S', I') coefficients over the order-3 library in (S, I) for a
// given transmission rate.
Matrix sir_true_coefficients(const SirParams& params, double beta,
                             int max_order = 3);

// Daily (by default) samples over `years` * 365 days. At every period
// boundary after t = 0 each compartment receives an independent uniform
// integer kick in [-amplitude, amplitude]; negative results are clamped to 0
// and noted in the set's log.
TrajectorySet simulate_sir(const Eigen::Vector3d& initial_state,
                           const SirParams& params,
                           const SirCalendar& calendar,
                           const SirOptions& options, std::uint64_t seed);

// Adds i.i.d. N(0, epsilon^2) noise to the states; derivatives are left
// untouched. Each trajectory draws from its own sub-seed of `seed`.
TrajectorySet add_noise(const TrajectorySet& set, double epsilon,
                        std::uint64_t seed);

}  // namespace hsindy
