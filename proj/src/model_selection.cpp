#include "hsindy/model_selection.hpp"

#include <cmath>
#include <limits>

#include "hsindy/integrator.hpp"

namespace hsindy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  Index term;
  Index equation;
  double coefficient;
};

}  // namespace

ModelTrajectory simulate_model(const SparseModel& model, const FeatureLibrary& library,
                               const Vector& initial_state, Index q,
                               const IntegrationOptions& options) {
  if (q < 1) throw std::invalid_argument("simulation length q must be >= 1");
  const Index n = library.dimension();
  if (initial_state.size() != n) throw std::invalid_argument("initial state dimension mismatch");
  if (model.coefficients.rows() != library.size() || model.coefficients.cols() != n) {
    throw std::invalid_argument("model shape does not match the library");
  }

  std::vector<Term> terms;
  for (Index j = 0; j < n; ++j) {
    for (Index l = 0; l < library.size(); ++l) {
      const double c = model.coefficients(l, j);
      if (c != 0.0) terms.push_back({l, j, c});
    }
  }
  std::vector<double> theta(static_cast<std::size_t>(library.size()));
  auto field = [&](double, const Vector& x) {
    library.evaluate_row(x.data(), theta.data());
    Vector dx = Vector::Zero(n);
    for (const auto& t : terms) dx(t.equation) += t.coefficient * theta[t.term];
    return dx;
  };

  ModelTrajectory out;
  out.states = Matrix::Constant(q, n, kInf);
  Vector x = initial_state;
  out.states.row(0) = x.transpose();
  out.valid_rows = 1;
  const double h = options.dt / options.substeps;
  double t = 0.0;
  for (Index a = 1; a < q; ++a) {
    for (int s = 0; s < options.substeps; ++s) {
      x = rk4_step(field, t, x, h);
      t += h;
    }
    if (!x.allFinite() || x.norm() > options.blowup_norm) {
      out.blew_up = true;
      return out;
    }
    out.states.row(a) = x.transpose();
    out.valid_rows = a + 1;
  }
  return out;
}

Index detect_switch(const Matrix& simulated, const Matrix& observed, double min_improvement) {
  if (simulated.rows() != observed.rows() || simulated.cols() != observed.cols()) {
    throw std::invalid_argument("detect_switch inputs differ in shape");
  }
  const Index length = simulated.rows();
  if (length < 2) return length;
  const Vector e = (simulated - observed).cwiseAbs().rowwise().mean();

  // Within-segment squared deviation for every prefix and suffix (Welford).
  auto sweep = [&](bool forward) {
    Vector sse(length + 1);
    sse(0) = 0.0;
    double mean = 0.0, m2 = 0.0;
    for (Index c = 1; c <= length; ++c) {
      const double v = forward ? e(c - 1) : e(length - c);
      const double delta = v - mean;
      mean += delta / static_cast<double>(c);
      m2 += delta * (v - mean);
      sse(c) = m2;
    }
    return sse;
  };
  const Vector prefix = sweep(true);
  const Vector suffix = sweep(false);
  const double total = prefix(length);
  if (!(total > 0.0)) return length;

  Index best = length;
  double best_cost = total;
  for (Index s = 1; s < length; ++s) {
    const double cost = prefix(s) + suffix(length - s);
    if (cost < best_cost) {
      best_cost = cost;
      best = s;
    }
  }
  if (total - best_cost < min_improvement * total) return length;
  return best;
}

double average_error(const Matrix& simulated, const Matrix& observed, Index switch_time) {
  if (simulated.rows() != observed.rows() || simulated.cols() != observed.cols()) {
    throw std::invalid_argument("average_error inputs differ in shape");
  }
  if (switch_time < 1 || switch_time > simulated.rows()) {
    throw std::invalid_argument("switch time outside [1, rows]");
  }
  const auto diff = (simulated.topRows(switch_time) - observed.topRows(switch_time)).array();
  return diff.square().colwise().sum().sum() /
         (static_cast<double>(switch_time) * static_cast<double>(simulated.cols()));
}

AiccScore aicc_from_rss(double rss, Index k, Index sample_count) {
  if (sample_count < 1) throw std::invalid_argument("AICc needs K >= 1");
  if (k < 0) throw std::invalid_argument("AICc needs k >= 0");
  AiccScore score;
  const double K = static_cast<double>(sample_count);
  const double kk = static_cast<double>(k);
  if (sample_count - k - 2 <= 0) {
    score.value = kInf;
    score.degenerate = true;
    return score;
  }
  if (std::isnan(rss) || rss == kInf) {
    score.value = kInf;
    return score;
  }
  if (rss < kRssFloor) {
    rss = kRssFloor;
    score.rss_floored = true;
  }
  const double aic = K * std::log(rss / K) + 2.0 * kk;
  score.value = aic + 2.0 * (kk + 1.0) * (kk + 2.0) / (K - kk - 2.0);
  return score;
}

AiccScore score_aicc(std::span<const double> errors, Index k) {
  double rss = 0.0;
  for (double e : errors) {
    if (e < 0.0) throw std::invalid_argument("negative validation error");
    rss += e;
  }
  return aicc_from_rss(rss, k, static_cast<Index>(errors.size()));
}

ScoredModel validate_model(const SparseModel& model, const FeatureLibrary& library,
                           const TrajectorySet& validation, const ClusterPair& cluster,
                           const ValidationSettings& settings) {
  ScoredModel scored;
  scored.model = model;
  scored.anchor = cluster.anchor;
  scored.errors.reserve(cluster.validation.size());
  scored.switch_times.reserve(cluster.validation.size());

  for (Index row : cluster.validation) {
    const Matrix observed = validation_segment(validation, row, settings.q);
    const Vector initial = validation.states.row(row).transpose();
    const ModelTrajectory sim =
        simulate_model(model, library, initial, observed.rows(), settings.integration);
    if (sim.blew_up) {
      scored.blew_up = true;
      scored.errors.push_back(kInf);
      scored.switch_times.push_back(observed.rows());
      continue;
    }
    const Index ts = detect_switch(sim.states, observed, settings.min_switch_improvement);
    scored.switch_times.push_back(ts);
    scored.errors.push_back(average_error(sim.states, observed, ts));
  }

  const AiccScore score = score_aicc(scored.errors, model.k);
  scored.aicc = score.value;
  scored.degenerate = score.degenerate;
  scored.rss_floored = score.rss_floored;
  return scored;
}

void assign_relative_aicc(std::span<ScoredModel> scored) {
  double best = kInf;
  for (const auto& s : scored) best = std::min(best, s.aicc);
  for (auto& s : scored) {
    s.rel_aicc = std::isfinite(best) ? s.aicc - best : kInf;
  }
}

std::vector<ScoredModel> rank_and_filter(std::vector<ScoredModel> scored, double threshold) {
  if (scored.empty()) throw std::invalid_argument("rank_and_filter needs at least one model");
  assign_relative_aicc(scored);
  std::vector<ScoredModel> kept;
  for (auto& s : scored) {
    if (std::isfinite(s.aicc) && s.rel_aicc < threshold) kept.push_back(std::move(s));
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const ScoredModel& a, const ScoredModel& b) { return a.aicc < b.aicc; });
  return kept;
}

}  // namespace hsindy
