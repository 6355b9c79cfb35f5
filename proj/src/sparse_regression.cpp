#include "hsindy/sparse_regression.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace hsindy {

// ---------------------------------------------------------------------------
// SupportSignature

SupportSignature::SupportSignature(Index terms, Index equations,
                                   std::vector<Position> positions)
    : terms_(terms), equations_(equations), positions_(std::move(positions)) {
  std::sort(positions_.begin(), positions_.end());
  positions_.erase(std::unique(positions_.begin(), positions_.end()), positions_.end());
  for (const auto& p : positions_) {
    if (p.term < 0 || p.term >= terms_ || p.equation < 0 || p.equation >= equations_) {
      throw std::invalid_argument("signature position outside the coefficient shape");
    }
  }
}

SupportSignature SupportSignature::of(const BoolMatrix& support) {
  std::vector<Position> positions;
  for (Index j = 0; j < support.cols(); ++j) {
    for (Index l = 0; l < support.rows(); ++l) {
      if (support(l, j)) positions.push_back({static_cast<int>(j), static_cast<int>(l)});
    }
  }
  return SupportSignature(support.rows(), support.cols(), std::move(positions));
}

SupportSignature SupportSignature::of_coefficients(const Matrix& coefficients) {
  return of((coefficients.array() != 0.0).eval());
}

bool SupportSignature::contains(int term, int equation) const {
  return std::binary_search(positions_.begin(), positions_.end(), Position{equation, term});
}

BoolMatrix SupportSignature::mask() const {
  BoolMatrix m = BoolMatrix::Constant(terms_, equations_, false);
  for (const auto& p : positions_) m(p.term, p.equation) = true;
  return m;
}

std::vector<int> SupportSignature::terms_of(int equation) const {
  std::vector<int> out;
  for (const auto& p : positions_) {
    if (p.equation == equation) out.push_back(p.term);
  }
  return out;
}

std::string SupportSignature::key() const {
  std::ostringstream out;
  for (Index j = 0; j < equations_; ++j) {
    if (j > 0) out << '|';
    out << j << ':';
    const auto terms = terms_of(static_cast<int>(j));
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (t > 0) out << '+';
      out << terms[t];
    }
  }
  return out.str();
}

std::string SupportSignature::describe(const FeatureLibrary& library,
                                       std::span<const std::string> equation_names) const {
  std::ostringstream out;
  for (Index j = 0; j < equations_; ++j) {
    if (j > 0) out << "; ";
    if (static_cast<std::size_t>(j) < equation_names.size()) {
      out << equation_names[j];
    } else if (j < library.dimension()) {
      out << 'd' << library.variable_names()[j];
    } else {
      out << "eq" << j;
    }
    out << " = ";
    const auto terms = terms_of(static_cast<int>(j));
    if (terms.empty()) out << '0';
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (t > 0) out << " + ";
      out << library.term_names().at(terms[t]);
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Least squares and STLSQ

LeastSquaresResult least_squares(const Matrix& theta, const Matrix& rhs) {
  if (theta.rows() < 1) throw std::invalid_argument("least squares needs at least one row");
  if (theta.rows() != rhs.rows()) throw std::invalid_argument("theta and rhs differ in rows");
  LeastSquaresResult out;
  if (theta.cols() == 0) {
    out.coefficients = Matrix::Zero(0, rhs.cols());
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(theta);
  out.coefficients = cod.solve(rhs);
  out.rank = cod.rank();
  out.rank_deficient = out.rank < theta.cols();
  return out;
}

SparseModel make_model(Matrix coefficients, double lambda) {
  SparseModel model;
  model.coefficients = std::move(coefficients);
  model.support = model.coefficients.array() != 0.0;
  model.k = model.support.count();
  model.lambda = lambda;
  model.converged = true;
  return model;
}

namespace {

struct ColumnFit {
  Vector coefficients;
  bool converged = false;
  int iterations = 0;
  bool rank_deficient = false;
};

ColumnFit stlsq_column(const Matrix& theta, const Vector& rhs, double lambda, int max_iters) {
  const Index p = theta.cols();
  std::vector<Index> active(static_cast<std::size_t>(p));
  for (Index l = 0; l < p; ++l) active[l] = l;

  ColumnFit fit;
  fit.coefficients = Vector::Zero(p);
  while (fit.iterations < max_iters) {
    if (active.empty()) {
      fit.coefficients.setZero();
      fit.converged = true;
      return fit;
    }
    Matrix sub(theta.rows(), static_cast<Index>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a) sub.col(static_cast<Index>(a)) = theta.col(active[a]);
    const LeastSquaresResult ls = least_squares(sub, rhs);
    ++fit.iterations;
    fit.rank_deficient = ls.rank_deficient;

    fit.coefficients.setZero();
    std::vector<Index> kept;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const double c = ls.coefficients(static_cast<Index>(a), 0);
      if (std::abs(c) >= lambda && c != 0.0) {
        kept.push_back(active[a]);
        fit.coefficients(active[a]) = c;
      }
    }
    if (kept.size() == active.size()) {
      fit.converged = true;
      return fit;
    }
    active = std::move(kept);
  }
  // Out of iterations: the last refit, thresholded, is returned unconverged.
  return fit;
}

}  // namespace

SparseModel stlsq(const Matrix& theta, const Matrix& rhs, double lambda,
                  const StlsqOptions& options) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (options.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (theta.rows() != rhs.rows()) throw std::invalid_argument("theta and rhs differ in rows");
  if (theta.rows() < 1) throw std::invalid_argument("stlsq needs at least one sample");

  Matrix scaled = theta;
  Vector scales = Vector::Ones(theta.cols());
  if (options.normalize_columns) {
    scales = column_norms(theta);
    for (Index l = 0; l < theta.cols(); ++l) scaled.col(l) /= scales(l);
  }

  Matrix xi = Matrix::Zero(theta.cols(), rhs.cols());
  bool converged = true;
  bool rank_deficient = false;
  int iterations = 0;
  for (Index j = 0; j < rhs.cols(); ++j) {
    const ColumnFit fit = stlsq_column(scaled, rhs.col(j), lambda, options.max_iters);
    xi.col(j) = fit.coefficients.cwiseQuotient(scales);
    converged = converged && fit.converged;
    rank_deficient = rank_deficient || fit.rank_deficient;
    iterations = std::max(iterations, fit.iterations);
  }
  SparseModel model = make_model(std::move(xi), lambda);
  model.converged = converged;
  model.iterations = iterations;
  model.rank_deficient = rank_deficient;
  return model;
}

std::vector<SparseModel> lambda_sweep(const Matrix& theta, const Matrix& rhs,
                                      std::span<const double> lambdas,
                                      const StlsqOptions& options) {
  if (lambdas.empty()) throw std::invalid_argument("lambda list is empty");
  std::vector<SparseModel> models;
  std::map<SupportSignature, std::size_t> seen;
  for (double lambda : lambdas) {
    SparseModel model = stlsq(theta, rhs, lambda, options);
    auto signature = model.signature();
    if (seen.contains(signature)) continue;
    seen.emplace(std::move(signature), models.size());
    models.push_back(std::move(model));
  }
  std::stable_sort(models.begin(), models.end(),
                   [](const SparseModel& a, const SparseModel& b) { return a.k < b.k; });
  return models;
}

std::vector<double> log_spaced(double low, double high, std::size_t count) {
  if (!(low > 0.0) || !(high >= low)) throw std::invalid_argument("log_spaced needs 0 < low <= high");
  if (count == 0) return {};
  if (count == 1) return {low};
  std::vector<double> out(count);
  const double a = std::log10(low);
  const double b = std::log10(high);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = low;
  out.back() = high;
  return out;
}

std::vector<double> default_lambda_grid() { return log_spaced(1e-4, 1e1, 30); }

}  // namespace hsindy
