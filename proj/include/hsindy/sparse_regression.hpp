#pragma once

#include <compare>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hsindy/common.hpp"
#include "hsindy/features.hpp"

namespace hsindy {

// Set of nonzero (term, equation) positions of a coefficient matrix. Two
// models have the same structure iff their signatures compare equal;
// coefficient values never enter the comparison.
class SupportSignature {
 public:
  struct Position {
    int equation;
    int term;
    auto operator<=>(const Position&) const = default;
  };

  SupportSignature() = default;
  SupportSignature(Index terms, Index equations, std::vector<Position> positions);
  static SupportSignature of(const BoolMatrix& support);
  static SupportSignature of_coefficients(const Matrix& coefficients);

  Index terms() const { return terms_; }
  Index equations() const { return equations_; }
  const std::vector<Position>& positions() const { return positions_; }
  Index size() const { return static_cast<Index>(positions_.size()); }
  bool empty() const { return positions_.empty(); }
  bool contains(int term, int equation) const;

  BoolMatrix mask() const;
  // Terms active in one equation, in library order.
  std::vector<int> terms_of(int equation) const;

  // Compact key such as "0:2|1:0+1" (equation:terms, equations separated by |).
  std::string key() const;
  // Human form such as "dy = v; dv = 1 + y" using the library's term names.
  std::string describe(const FeatureLibrary& library,
                       std::span<const std::string> equation_names = {}) const;

  auto operator<=>(const SupportSignature&) const = default;

 private:
  Index terms_ = 0;
  Index equations_ = 0;
  std::vector<Position> positions_;
};

struct LeastSquaresResult {
  Matrix coefficients;
  Index rank = 0;
  bool rank_deficient = false;
};

// Minimum-norm solution of min ||rhs - theta * xi|| through a complete
// orthogonal decomposition (column-pivoted QR followed by RQ of the
// trapezoid). Rank deficiency is reported, not treated as an error.
LeastSquaresResult least_squares(const Matrix& theta, const Matrix& rhs);

struct StlsqOptions {
  int max_iters = 20;
  // Solve on unit 2-norm columns; the threshold applies to the scaled
  // coefficients and the returned coefficients are unscaled.
  bool normalize_columns = false;
};

struct SparseModel {
  Matrix coefficients;  // p x n
  BoolMatrix support;   // coefficients != 0
  double lambda = 0.0;
  Index k = 0;
  bool converged = false;
  int iterations = 0;
  bool rank_deficient = false;
  std::shared_ptr<const FeatureLibrary> library;

  SupportSignature signature() const { return SupportSignature::of(support); }
};

// Builds a model (support, k) from a coefficient matrix.
SparseModel make_model(Matrix coefficients, double lambda = 0.0);

// Sequentially thresholded least squares. Each equation (column of rhs) is
// sparsified on its own: refit on the active terms, drop |xi| < lambda,
// repeat until the active set stops changing or max_iters refits are done.
SparseModel stlsq(const Matrix& theta, const Matrix& rhs, double lambda,
                  const StlsqOptions& options = {});

// One stlsq run per lambda, deduplicated by signature (first lambda wins),
// returned in ascending k. Stable for equal k.
std::vector<SparseModel> lambda_sweep(const Matrix& theta, const Matrix& rhs,
                                      std::span<const double> lambdas,
                                      const StlsqOptions& options = {});

std::vector<double> log_spaced(double low, double high, std::size_t count);

// 30 log-spaced values on [1e-4, 1e1].
std::vector<double> default_lambda_grid();

}  // namespace hsindy
