#pragma once

#include <span>
#include <string>
#include <vector>

#include "hsindy/common.hpp"

namespace hsindy {

// Multivariate monomial library.
//
// Terms are all exponent vectors with total degree <= max_order, graded by
// degree and lexicographic within a degree (first variable highest), so
// term 0 is always the constant. For n = 2, order 2: 1, x, y, x^2, x*y, y^2.
class FeatureLibrary {
 public:
  FeatureLibrary(int dimension, int max_order,
                 std::vector<std::string> variable_names = {});

  int dimension() const { return dimension_; }
  int max_order() const { return max_order_; }
  Index size() const { return static_cast<Index>(exponents_.size()); }

  const std::vector<std::vector<int>>& exponents() const { return exponents_; }
  const std::vector<std::string>& term_names() const { return term_names_; }
  const std::vector<std::string>& variable_names() const {
    return variable_names_;
  }

  // Position of an exponent vector, or -1 when it is not in the library.
  Index find(std::span<const int> exponent) const;

  // Theta(X): m x p. Non-finite inputs propagate into the output; check with
  // Matrix::allFinite().
  Matrix evaluate(const Matrix& states) const;

  // One row of Theta into `out` (size p).
  void evaluate_row(const double* state, double* out) const;

 private:
  int dimension_;
  int max_order_;
  std::vector<std::string> variable_names_;
  std::vector<std::vector<int>> exponents_;
  std::vector<std::string> term_names_;
  // term l = term parent_[l] * x[factor_[l]] for l >= 1
  std::vector<Index> parent_;
  std::vector<int> factor_;
};

FeatureLibrary build_library(int dimension, int max_order,
                             std::vector<std::string> variable_names = {});

// C(n + d, d), the number of monomials of degree <= d in n variables.
std::size_t monomial_count(int dimension, int max_order);

// 2-norm condition number sigma_max / sigma_min of a possibly rectangular
// matrix. Returns +infinity when sigma_min is below the rank threshold.
double condition_number(const Matrix& theta);

// Unit 2-norm column scales (zero columns get scale 1).
Vector column_norms(const Matrix& theta);

}  // namespace hsindy
