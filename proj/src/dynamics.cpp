#include "hsindy/dynamics.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "hsindy/features.hpp"
#include "hsindy/integrator.hpp"

namespace hsindy {

// ---------------------------------------------------------------------------
// TrajectorySet

Index TrajectorySet::trajectory_of(Index row) const {
  if (row < 0 || row >= rows()) throw std::out_of_range("row outside trajectory set");
  auto it = std::upper_bound(trajectory_starts.begin(), trajectory_starts.end(), row);
  return static_cast<Index>(it - trajectory_starts.begin()) - 1;
}

Index TrajectorySet::trajectory_end(Index row) const {
  const Index traj = trajectory_of(row);
  return traj + 1 < trajectory_count() ? trajectory_starts[traj + 1] : rows();
}

TrajectorySet TrajectorySet::select_states(std::span<const Index> columns) const {
  TrajectorySet out;
  out.times = times;
  out.trajectory_starts = trajectory_starts;
  out.regime_labels = regime_labels;
  out.log = log;
  out.states.resize(rows(), static_cast<Index>(columns.size()));
  out.derivatives.resize(rows(), static_cast<Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] < 0 || columns[c] >= dimension()) {
      throw std::invalid_argument("state column " + std::to_string(columns[c]) +
                                  " out of range");
    }
    out.states.col(static_cast<Index>(c)) = states.col(columns[c]);
    out.derivatives.col(static_cast<Index>(c)) = derivatives.col(columns[c]);
  }
  return out;
}

void TrajectorySet::validate() const {
  const auto m = static_cast<std::size_t>(rows());
  if (derivatives.rows() != rows() || derivatives.cols() != states.cols()) {
    throw std::invalid_argument("states and derivatives differ in shape");
  }
  if (times.size() != m || regime_labels.size() != m) {
    throw std::invalid_argument("times/labels length differs from sample count");
  }
  if (m > 0 && (trajectory_starts.empty() || trajectory_starts.front() != 0)) {
    throw std::invalid_argument("first trajectory must start at row 0");
  }
  for (std::size_t t = 1; t < trajectory_starts.size(); ++t) {
    if (trajectory_starts[t] <= trajectory_starts[t - 1] ||
        trajectory_starts[t] >= rows()) {
      throw std::invalid_argument("trajectory boundaries must be increasing");
    }
  }
}

TrajectorySet concatenate(std::span<const TrajectorySet> parts) {
  TrajectorySet out;
  Index total = 0;
  Index n = parts.empty() ? 0 : parts.front().dimension();
  for (const auto& p : parts) {
    if (p.dimension() != n) throw std::invalid_argument("cannot concatenate sets of different dimension");
    total += p.rows();
  }
  out.states.resize(total, n);
  out.derivatives.resize(total, n);
  Index offset = 0;
  for (const auto& p : parts) {
    out.states.middleRows(offset, p.rows()) = p.states;
    out.derivatives.middleRows(offset, p.rows()) = p.derivatives;
    out.times.insert(out.times.end(), p.times.begin(), p.times.end());
    out.regime_labels.insert(out.regime_labels.end(), p.regime_labels.begin(),
                             p.regime_labels.end());
    for (Index s : p.trajectory_starts) out.trajectory_starts.push_back(s + offset);
    out.log.insert(out.log.end(), p.log.begin(), p.log.end());
    offset += p.rows();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hopper

namespace {

bool in_chart(HopperRegime regime, double y) {
  return regime == HopperRegime::Compression ? y <= 1.0 : y > 1.0;
}

HopperRegime other(HopperRegime regime) {
  return regime == HopperRegime::Compression ? HopperRegime::Flight
                                             : HopperRegime::Compression;
}

Index sample_count(double step, double horizon) {
  return static_cast<Index>(std::floor(horizon / step + 1e-9)) + 1;
}

}  // namespace

HybridSystem hopper_system(const HopperParams& params) {
  HybridSystem sys;
  sys.name = "hopper";
  sys.guard = GuardKind::State;
  sys.guard_description = "y = 1";
  const std::string compression =
      params.form == CompressionForm::AsPrinted ? "y'' = 1 - kappa*(y - 1)"
                                                : "y'' = -kappa*(y - 1) - 1";
  sys.charts = {{static_cast<int>(HopperRegime::Compression), "compression", compression},
                {static_cast<int>(HopperRegime::Flight), "flight", "y'' = -1"}};
  sys.parameters = {{"kappa", params.kappa}};
  return sys;
}

Eigen::Vector2d hopper_field(const HopperParams& params, HopperRegime regime,
                             const Eigen::Vector2d& state) {
  const double y = state(0);
  double accel = -1.0;
  if (regime == HopperRegime::Compression) {
    accel = params.form == CompressionForm::AsPrinted
                ? 1.0 - params.kappa * (y - 1.0)
                : -params.kappa * (y - 1.0) - 1.0;
  }
  return {state(1), accel};
}

Matrix hopper_true_coefficients(const HopperParams& params, HopperRegime regime) {
  // Library order: 1, y, v, y^2, y*v, v^2
  Matrix xi = Matrix::Zero(6, 2);
  xi(2, 0) = 1.0;
  if (regime == HopperRegime::Flight) {
    xi(0, 1) = -1.0;
  } else {
    xi(0, 1) = params.form == CompressionForm::AsPrinted ? 1.0 + params.kappa
                                                         : params.kappa - 1.0;
    xi(1, 1) = -params.kappa;
  }
  return xi;
}

TrajectorySet simulate_hopper(const Eigen::Vector2d& initial_state,
                              const HopperParams& params,
                              const FixedStepOptions& options,
                              std::vector<HopperEvent>* events) {
  if (!(options.dt > 0.0)) throw std::invalid_argument("hopper dt must be positive");
  if (!(options.t_end > 0.0)) throw std::invalid_argument("hopper t_end must be positive");
  if (!(params.kappa > 0.0)) throw std::invalid_argument("hopper kappa must be positive");
  if (options.substeps < 1) throw std::invalid_argument("substeps must be >= 1");

  const Index count = sample_count(options.dt, options.t_end);
  const double h = options.dt / options.substeps;

  TrajectorySet out;
  out.times.resize(count);
  out.states.resize(count, 2);
  out.derivatives.resize(count, 2);
  out.regime_labels.resize(count);
  out.trajectory_starts = {0};

  Eigen::Vector2d x = initial_state;
  HopperRegime regime = initial_state(0) <= 1.0 ? HopperRegime::Compression
                                                : HopperRegime::Flight;
  double t = 0.0;

  auto record = [&](Index i) {
    out.times[i] = static_cast<double>(i) * options.dt;
    out.states.row(i) = x.transpose();
    out.derivatives.row(i) = hopper_field(params, regime, x).transpose();
    out.regime_labels[i] = static_cast<int>(regime);
  };

  auto advance = [&](double span) {
    while (span > 0.0) {
      auto field = [&](double, const Eigen::Vector2d& s) {
        return hopper_field(params, regime, s);
      };
      const Eigen::Vector2d trial = rk4_step(field, t, x, span);
      if (!trial.allFinite()) {
        throw NumericalError("hopper state diverged at t = " + std::to_string(t));
      }
      if (in_chart(regime, trial(0))) {
        x = trial;
        t += span;
        return;
      }
      // Bracket [lo, hi]: lo stays in the current chart, hi has crossed.
      double lo = 0.0;
      double hi = span;
      Eigen::Vector2d at_hi = trial;
      for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(at_hi(0) - 1.0) <= options.guard_tolerance) break;
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const Eigen::Vector2d at_mid = rk4_step(field, t, x, mid);
        if (in_chart(regime, at_mid(0))) {
          lo = mid;
        } else {
          hi = mid;
          at_hi = at_mid;
        }
      }
      x = at_hi;
      t += hi;
      span -= hi;
      regime = other(regime);
      if (events) events->push_back({t, x(0), x(1), regime});
    }
  };

  record(0);
  for (Index i = 1; i < count; ++i) {
    for (int s = 0; s < options.substeps; ++s) advance(h);
    record(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SIR

SirCalendar SirCalendar::school_year() {
  SirCalendar cal;
  cal.periods = {{0.0, 35.0, false},
                 {35.0, 155.0, true},
                 {155.0, 225.0, false},
                 {225.0, 365.0, true}};
  cal.year_length = 365.0;
  return cal;
}

void SirCalendar::validate() const {
  if (periods.empty()) throw std::invalid_argument("calendar has no periods");
  if (!(year_length > 0.0)) throw std::invalid_argument("calendar year length must be positive");
  if (periods.front().start != 0.0) throw std::invalid_argument("calendar must start at day 0");
  for (std::size_t i = 0; i < periods.size(); ++i) {
    if (!(periods[i].end > periods[i].start)) {
      throw std::invalid_argument("calendar period has non-positive length");
    }
    if (i > 0 && periods[i].start != periods[i - 1].end) {
      throw std::invalid_argument("calendar periods leave a gap or overlap");
    }
  }
  if (periods.back().end != year_length) {
    throw std::invalid_argument("calendar periods must cover the whole year");
  }
}

bool SirCalendar::in_session(double t) const {
  double day = std::fmod(t, year_length);
  if (day < 0.0) day += year_length;
  for (const auto& p : periods) {
    if (day >= p.start && day < p.end) return p.in_session;
  }
  return periods.back().in_session;
}

double SirCalendar::next_boundary(double t) const {
  const double year = std::floor(t / year_length);
  for (int offset = 0; offset < 2; ++offset) {
    const double base = (year + offset) * year_length;
    for (const auto& p : periods) {
      if (base + p.start > t) return base + p.start;
    }
  }
  return (year + 2.0) * year_length;
}

HybridSystem sir_system(const SirParams& params) {
  HybridSystem sys;
  sys.name = "sir";
  sys.guard = GuardKind::Time;
  sys.guard_description = "school calendar period boundaries";
  sys.charts = {{static_cast<int>(SirRegime::Break), "break",
                 "beta = beta_hat / (1 + b)"},
                {static_cast<int>(SirRegime::Session), "session",
                 "beta = beta_hat * (1 + b)"}};
  sys.parameters = {{"nu", params.nu},       {"d", params.d},
                    {"N", params.N},         {"gamma", params.gamma},
                    {"beta_hat", params.beta_hat}, {"b", params.b}};
  return sys;
}

double beta_of_t(double t, double beta_hat, double b, const SirCalendar& calendar) {
  return calendar.in_session(t) ? beta_hat * (1.0 + b) : beta_hat / (1.0 + b);
}

Eigen::Vector3d sir_field(const SirParams& p, double beta, const Eigen::Vector3d& x) {
  const double S = x(0), I = x(1), R = x(2);
  const double infection = beta / p.N * I * S;
  return {p.nu * p.N - infection - p.d * S,
          infection - (p.gamma + p.d) * I,
          p.gamma * I - p.d * R};
}

Matrix sir_true_coefficients(const SirParams& p, double beta, int max_order) {
  const FeatureLibrary lib(2, max_order);
  Matrix xi = Matrix::Zero(lib.size(), 2);
  const std::vector<int> one{0, 0}, s{1, 0}, i{0, 1}, si{1, 1};
  xi(lib.find(one), 0) = p.nu * p.N;
  xi(lib.find(s), 0) = -p.d;
  xi(lib.find(si), 0) = -beta / p.N;
  xi(lib.find(si), 1) = beta / p.N;
  xi(lib.find(i), 1) = -(p.gamma + p.d);
  return xi;
}

TrajectorySet simulate_sir(const Eigen::Vector3d& initial_state,
                           const SirParams& params, const SirCalendar& calendar,
                           const SirOptions& options, std::uint64_t seed) {
  calendar.validate();
  if (options.years < 1) throw std::invalid_argument("SIR years must be >= 1");
  if (!(options.record_step > 0.0)) throw std::invalid_argument("SIR record step must be positive");
  if (options.substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  const double population = initial_state.sum();
  if (std::abs(population - params.N) > 1e-9 * std::max(1.0, params.N)) {
    throw std::invalid_argument("SIR initial state must sum to N");
  }

  const double horizon = options.years * calendar.year_length;
  const Index count = static_cast<Index>(std::floor(horizon / options.record_step + 1e-9));
  const double h = options.record_step / options.substeps;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kick(-options.perturbation_amplitude,
                                          options.perturbation_amplitude);

  TrajectorySet out;
  out.times.resize(count);
  out.states.resize(count, 3);
  out.derivatives.resize(count, 3);
  out.regime_labels.resize(count);
  out.trajectory_starts = {0};

  Eigen::Vector3d x = initial_state;
  double t = 0.0;
  double boundary = calendar.next_boundary(0.0);

  auto perturb = [&] {
    if (!options.perturb) return;
    static const char* kNames[] = {"S", "I", "R"};
    for (int c = 0; c < 3; ++c) {
      x(c) += kick(rng);
      if (x(c) < 0.0) {
        std::ostringstream msg;
        msg << "clamped negative " << kNames[c] << " (" << x(c) << ") to 0 at t = " << t;
        out.log.push_back(msg.str());
        x(c) = 0.0;
      }
    }
  };

  // Integrate to `target`, splitting steps at period boundaries so each RK4
  // step sees a single transmission rate.
  auto integrate_to = [&](double target) {
    while (t < target - 1e-12) {
      const double stop = std::min(target, boundary);
      const double beta = beta_of_t(t, params.beta_hat, params.b, calendar);
      auto field = [&](double, const Eigen::Vector3d& s) { return sir_field(params, beta, s); };
      while (t < stop - 1e-12) {
        const double step = std::min(h, stop - t);
        x = rk4_step(field, t, x, step);
        t = (stop - t - step) <= 1e-12 ? stop : t + step;
      }
      if (!x.allFinite()) throw NumericalError("SIR state diverged at t = " + std::to_string(t));
      if (std::abs(t - boundary) <= 1e-12) {
        t = boundary;
        perturb();
        boundary = calendar.next_boundary(t);
      }
    }
  };

  for (Index i = 0; i < count; ++i) {
    const double ti = static_cast<double>(i) * options.record_step;
    integrate_to(ti);
    t = ti;
    const double beta = beta_of_t(t, params.beta_hat, params.b, calendar);
    out.times[i] = ti;
    out.states.row(i) = x.transpose();
    out.derivatives.row(i) = sir_field(params, beta, x).transpose();
    out.regime_labels[i] = static_cast<int>(calendar.in_session(t) ? SirRegime::Session
                                                                    : SirRegime::Break);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Noise

TrajectorySet add_noise(const TrajectorySet& set, double epsilon, std::uint64_t seed) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("noise level must be >= 0");
  TrajectorySet out = set;
  if (epsilon == 0.0) return out;
  for (Index traj = 0; traj < set.trajectory_count(); ++traj) {
    std::mt19937_64 rng(derive_seed(seed, streams::kNoise, static_cast<std::uint64_t>(traj)));
    std::normal_distribution<double> normal(0.0, epsilon);
    const Index begin = set.trajectory_starts[traj];
    const Index end = traj + 1 < set.trajectory_count() ? set.trajectory_starts[traj + 1] : set.rows();
    for (Index i = begin; i < end; ++i) {
      for (Index j = 0; j < set.dimension(); ++j) out.states(i, j) += normal(rng);
    }
  }
  return out;
}

}  // namespace hsindy
