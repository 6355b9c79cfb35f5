#include "hsindy/features.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hsindy {

namespace {

std::vector<std::string> default_names(int n) {
  static const char* kShort[] = {"x", "y", "z"};
  std::vector<std::string> names;
  for (int j = 0; j < n; ++j) {
    names.push_back(n <= 3 ? std::string(kShort[j])
                           : "x" + std::to_string(j + 1));
  }
  return names;
}

// All exponent vectors of total degree `degree`, first variable descending.
void enumerate_degree(int n, int degree, int position, std::vector<int>& work,
                      std::vector<std::vector<int>>& out) {
  if (position == n - 1) {
    work[position] = degree;
    out.push_back(work);
    return;
  }
  for (int e = degree; e >= 0; --e) {
    work[position] = e;
    enumerate_degree(n, degree - e, position + 1, work, out);
  }
}

std::string term_name(const std::vector<int>& exponent,
                      const std::vector<std::string>& names) {
  std::ostringstream out;
  bool first = true;
  for (std::size_t j = 0; j < exponent.size(); ++j) {
    if (exponent[j] == 0) continue;
    if (!first) out << '*';
    out << names[j];
    if (exponent[j] > 1) out << '^' << exponent[j];
    first = false;
  }
  return first ? "1" : out.str();
}

}  // namespace

FeatureLibrary::FeatureLibrary(int dimension, int max_order,
                               std::vector<std::string> variable_names)
    : dimension_(dimension),
      max_order_(max_order),
      variable_names_(std::move(variable_names)) {
  if (dimension < 1) throw std::invalid_argument("library dimension must be >= 1");
  if (max_order < 0) throw std::invalid_argument("library max_order must be >= 0");
  if (variable_names_.empty()) variable_names_ = default_names(dimension);
  if (static_cast<int>(variable_names_.size()) != dimension) {
    throw std::invalid_argument("variable name count does not match dimension");
  }

  std::vector<int> work(dimension, 0);
  for (int degree = 0; degree <= max_order; ++degree) {
    enumerate_degree(dimension, degree, 0, work, exponents_);
  }

  parent_.assign(exponents_.size(), -1);
  factor_.assign(exponents_.size(), -1);
  for (std::size_t l = 1; l < exponents_.size(); ++l) {
    std::vector<int> reduced = exponents_[l];
    int j = 0;
    while (reduced[j] == 0) ++j;
    --reduced[j];
    parent_[l] = find(reduced);
    factor_[l] = j;
  }
  for (const auto& e : exponents_) term_names_.push_back(term_name(e, variable_names_));
}

Index FeatureLibrary::find(std::span<const int> exponent) const {
  for (std::size_t l = 0; l < exponents_.size(); ++l) {
    if (std::equal(exponent.begin(), exponent.end(), exponents_[l].begin(),
                   exponents_[l].end())) {
      return static_cast<Index>(l);
    }
  }
  return -1;
}

void FeatureLibrary::evaluate_row(const double* state, double* out) const {
  out[0] = 1.0;
  for (std::size_t l = 1; l < exponents_.size(); ++l) {
    out[l] = out[parent_[l]] * state[factor_[l]];
  }
}

Matrix FeatureLibrary::evaluate(const Matrix& states) const {
  if (states.cols() != dimension_) {
    throw std::invalid_argument("state matrix has " +
                                std::to_string(states.cols()) +
                                " columns, library expects " +
                                std::to_string(dimension_));
  }
  // Row-major scratch keeps evaluate_row contiguous.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> theta(
      states.rows(), size());
  std::vector<double> row(dimension_);
  for (Index i = 0; i < states.rows(); ++i) {
    for (int j = 0; j < dimension_; ++j) row[j] = states(i, j);
    evaluate_row(row.data(), theta.row(i).data());
  }
  return theta;
}

FeatureLibrary build_library(int dimension, int max_order,
                             std::vector<std::string> variable_names) {
  return FeatureLibrary(dimension, max_order, std::move(variable_names));
}

std::size_t monomial_count(int dimension, int max_order) {
  // C(n + d, d) computed incrementally; exact for the sizes used here.
  std::size_t result = 1;
  for (int i = 1; i <= max_order; ++i) {
    result = result * static_cast<std::size_t>(dimension + i) / static_cast<std::size_t>(i);
  }
  return result;
}

double condition_number(const Matrix& theta) {
  if (theta.size() == 0 || theta.isZero(0.0)) {
    throw std::invalid_argument("condition number of an empty or zero matrix");
  }
  Eigen::JacobiSVD<Matrix> svd(theta);
  const Vector& s = svd.singularValues();
  const double largest = s(0);
  const double smallest = s(s.size() - 1);
  const double threshold = largest * std::numeric_limits<double>::epsilon() *
                           static_cast<double>(std::max(theta.rows(), theta.cols()));
  if (!(smallest > threshold)) return std::numeric_limits<double>::infinity();
  return largest / smallest;
}

Vector column_norms(const Matrix& theta) {
  Vector norms = theta.colwise().norm().transpose();
  for (Index l = 0; l < norms.size(); ++l) {
    if (norms(l) == 0.0) norms(l) = 1.0;
  }
  return norms;
}

}  // namespace hsindy
