#include <doctest.h>

#include <lapacke.h>

#include <cmath>
#include <random>

#include "hsindy/clustering.hpp"
#include "hsindy/diagnostics.hpp"
#include "hsindy/features.hpp"

using namespace hsindy;

namespace {

// Condition number from LAPACK's dgesvd.
double lapack_condition(const Matrix& a) {
  Matrix copy = a;
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  std::vector<double> s(static_cast<std::size_t>(std::min(m, n)));
  std::vector<double> superb(s.size());
  const lapack_int info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'N', 'N', m, n, copy.data(), m,
                                         s.data(), nullptr, 1, nullptr, 1, superb.data());
  REQUIRE(info == 0);
  return s.front() / s.back();
}

// Number of exponent vectors in N^n with sum <= d, by brute force.
std::size_t count_monomials(int n, int d) {
  std::size_t count = 0;
  std::vector<int> e(n, 0);
  while (true) {
    int sum = 0;
    for (int v : e) sum += v;
    if (sum <= d) ++count;
    int j = 0;
    while (j < n && ++e[j] > d) e[j++] = 0;
    if (j == n) break;
  }
  return count;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("two variables up to second order") {
  const auto lib = build_library(2, 2);
  CHECK(lib.size() == 6);
  const std::vector<std::string> names{"1", "x", "y", "x^2", "x*y", "y^2"};
  CHECK(lib.term_names() == names);
  CHECK(lib.exponents()[0] == std::vector<int>{0, 0});
  CHECK(lib.exponents()[4] == std::vector<int>{1, 1});
}

TEST_CASE("term counts") {
  CHECK(build_library(2, 3).size() == 10);
  const auto constant = build_library(1, 0);
  CHECK(constant.size() == 1);
  CHECK(constant.term_names()[0] == "1");
  for (int n = 1; n <= 4; ++n) {
    for (int d = 0; d <= 5; ++d) {
      const auto lib = build_library(n, d);
      CHECK(static_cast<std::size_t>(lib.size()) == count_monomials(n, d));
      CHECK(monomial_count(n, d) == count_monomials(n, d));
    }
  }
}

TEST_CASE("terms are graded with the constant first") {
  const auto lib = build_library(3, 4);
  int previous = 0;
  for (const auto& e : lib.exponents()) {
    int degree = 0;
    for (int v : e) degree += v;
    CHECK(degree >= previous);
    previous = degree;
  }
  const std::vector<int> xyz{1, 1, 1};
  CHECK(lib.term_names()[static_cast<std::size_t>(lib.find(xyz))] == "x*y*z");
  const std::vector<int> missing{5, 0, 0};
  CHECK(lib.find(missing) == -1);
  CHECK(build_library(4, 1).term_names()[1] == "x1");
  CHECK(FeatureLibrary(2, 2, {"S", "I"}).term_names()[4] == "S*I");
}

TEST_CASE("evaluation examples") {
  const auto lib = build_library(2, 2);
  Matrix x(1, 2);
  x << 2, 3;
  Matrix expected(1, 6);
  expected << 1, 2, 3, 4, 6, 9;
  CHECK(lib.evaluate(x) == expected);

  const Matrix zero = lib.evaluate(Matrix::Zero(5, 2));
  CHECK(zero.col(0).isOnes());
  CHECK(zero.rightCols(5).isZero(0.0));
}

TEST_CASE("evaluation matches repeated multiplication") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto lib = build_library(2, 3);
  Matrix x(10, 2);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  const Matrix theta = lib.evaluate(x);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index l = 0; l < lib.size(); ++l) {
      double v = 1.0;
      for (int j = 0; j < 2; ++j) {
        for (int p = 0; p < lib.exponents()[l][j]; ++p) v *= x(i, j);
      }
      CHECK(theta(i, l) == doctest::Approx(v).epsilon(1e-15));
    }
  }
}

TEST_CASE("integer inputs evaluate exactly") {
  const auto lib = build_library(3, 5);
  Matrix x(2, 3);
  x << 2, -3, 5, 7, 1, -4;
  const Matrix theta = lib.evaluate(x);
  for (Index i = 0; i < 2; ++i) {
    for (Index l = 0; l < lib.size(); ++l) {
      long long v = 1;
      for (int j = 0; j < 3; ++j) {
        for (int p = 0; p < lib.exponents()[l][j]; ++p) v *= static_cast<long long>(x(i, j));
      }
      CHECK(theta(i, l) == static_cast<double>(v));
    }
  }
}

TEST_CASE("non-finite inputs propagate") {
  const auto lib = build_library(2, 2);
  Matrix x(1, 2);
  x << std::nan(""), 1.0;
  CHECK_FALSE(lib.evaluate(x).allFinite());
  CHECK_THROWS(lib.evaluate(Matrix::Zero(3, 3)));
}

TEST_CASE("condition number examples") {
  CHECK(condition_number(Matrix::Identity(4, 4)) == doctest::Approx(1.0));
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 10, 1, 0.1;
  CHECK(condition_number(d) == doctest::Approx(100.0).epsilon(1e-12));
  Matrix singular(3, 2);
  singular << 1, 2, 2, 4, 3, 6;
  CHECK(std::isinf(condition_number(singular)));
  CHECK_THROWS(condition_number(Matrix::Zero(3, 3)));
}

TEST_CASE("condition number is scale invariant") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix a(20, 5);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
  const double k = condition_number(a);
  for (double c : {-3.0, 1e-4, 250.0}) {
    CHECK(condition_number(c * a) == doctest::Approx(k).epsilon(1e-10));
  }
}

TEST_CASE("condition number of a noisy compression cluster agrees with LAPACK") {
  SweepConfig config;
  config.training_trajectories = 100;
  const auto data = sweep_training_data(config);
  const auto rows = regime_subset(data, HopperRegime::Compression, config.guard_margin);
  REQUIRE(rows.size() >= 1000);
  Matrix coords(static_cast<Index>(rows.size()), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) coords.row(static_cast<Index>(i)) = data.states.row(rows[i]);
  Index seed = 0;
  for (Index i = 1; i < coords.rows(); ++i) {
    if (coords(i, 0) < coords(seed, 0)) seed = i;
  }
  const auto members = nearest_rows(coords, coords.row(seed), 1000, seed);
  Matrix x(1000, 2);
  for (Index i = 0; i < 1000; ++i) x.row(i) = coords.row(members[i]);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 1e-3);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] += noise(rng);

  const Matrix theta = build_library(2, 2).evaluate(x);
  CHECK(condition_number(theta) == doctest::Approx(lapack_condition(theta)).epsilon(1e-6));
}

TEST_CASE("column norms") {
  Matrix a(2, 3);
  a << 3, 0, 1, 4, 0, 0;
  const Vector n = column_norms(a);
  CHECK(n(0) == 5.0);
  CHECK(n(1) == 1.0);
  CHECK(n(2) == 1.0);
}

}  // TEST_SUITE
