#include <doctest.h>

#include <algorithm>
#include <random>

#include "hsindy/clustering.hpp"
#include "hsindy/dynamics.hpp"

using namespace hsindy;

namespace {

// Full sort of all distances; lower index first on ties.
std::vector<Index> brute_force_knn(const Matrix& points, const RowVector& query, Index count) {
  std::vector<Index> order(static_cast<std::size_t>(points.rows()));
  std::vector<double> dist(order.size());
  for (Index i = 0; i < points.rows(); ++i) {
    order[static_cast<std::size_t>(i)] = i;
    double d = 0.0;
    for (Index c = 0; c < points.cols(); ++c) {
      const double diff = points(i, c) - query(c);
      d += diff * diff;
    }
    dist[static_cast<std::size_t>(i)] = d;
  }
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(count));
  return order;
}

TrajectorySet two_state_set() {
  TrajectorySet set;
  set.states.resize(4, 2);
  set.states << 1, 2, 3, 4, 5, 6, 7, 8;
  set.derivatives = -set.states;
  set.times = {0, 1, 2, 3};
  set.trajectory_starts = {0};
  set.regime_labels = {0, 0, 0, 0};
  return set;
}

}  // namespace

TEST_SUITE("clustering") {

TEST_CASE("coordinate selection") {
  const auto set = two_state_set();
  const std::vector<Index> phase{0, 1};
  CHECK(select_coordinates(set, phase) == set.states);
  const std::vector<Index> all{0, 1, 2, 3};
  const Matrix y = select_coordinates(set, all);
  CHECK(y.cols() == 4);
  CHECK(y.rightCols(2) == set.derivatives);
  const std::vector<Index> mixed{3, 0};
  CHECK(select_coordinates(set, mixed)(1, 0) == -4.0);

  const std::vector<Index> bad{4};
  CHECK_THROWS_AS(select_coordinates(set, bad), std::invalid_argument);
  CHECK_THROWS_AS(select_coordinates(set, std::vector<Index>{}), std::invalid_argument);
}

TEST_CASE("SIR coordinates keep S and I") {
  const auto set = simulate_sir({12, 13, 975}, {}, SirCalendar::school_year(), {}, 1);
  const std::vector<Index> si{0, 1};
  const Matrix y = select_coordinates(set, si);
  CHECK(y.cols() == 2);
  CHECK(y.col(1) == set.states.col(1));
}

TEST_CASE("duplicate of the anchor comes before any other point") {
  Matrix y(5, 2);
  y << 0, 0, 1, 1, 0.1, 0, 1, 1, 5, 5;
  const auto pair = build_cluster(y, y, 1, 3);
  CHECK(pair.train[0] == 1);
  CHECK(pair.train[1] == 3);
  CHECK(pair.train.size() == 3);
}

TEST_CASE("cluster of every row") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix y(12, 2);
  for (Index i = 0; i < y.size(); ++i) y.data()[i] = u(rng);
  const auto pair = build_cluster(y, y, 4, 12);
  std::vector<Index> sorted = pair.train;
  std::sort(sorted.begin(), sorted.end());
  for (Index i = 0; i < 12; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
  CHECK((pair.centroid - y.colwise().mean()).norm() < 1e-15);
  CHECK_THROWS_AS(build_cluster(y, y, 0, 13), std::invalid_argument);
  CHECK_THROWS_AS(build_cluster(y, y.topRows(5), 0, 6), std::invalid_argument);
}

TEST_CASE("kNN agrees with exhaustive search on 200 points") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix t(200, 2), v(200, 2);
    for (Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
    for (Index i = 0; i < v.size(); ++i) v.data()[i] = u(rng);
    // Lattice points so ties actually occur.
    if (trial % 2 == 1) {
      t = (t * 4).array().round() / 4;
      v = (v * 4).array().round() / 4;
    }
    for (Index anchor : {Index{0}, Index{57}, Index{199}}) {
      const auto pair = build_cluster(t, v, anchor, 30);
      // The anchor leads even when an exact duplicate has a lower index.
      auto full = brute_force_knn(t, t.row(anchor), 200);
      full.erase(std::find(full.begin(), full.end(), anchor));
      full.insert(full.begin(), anchor);
      full.resize(30);
      CHECK(pair.train == full);

      RowVector centroid = RowVector::Zero(2);
      for (Index i : full) centroid += t.row(i);
      centroid /= 30.0;
      CHECK(pair.validation == brute_force_knn(v, centroid, 30));
    }
  }
}

TEST_CASE("anchor is always first") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix y(50, 3);
  for (Index i = 0; i < y.size(); ++i) y.data()[i] = u(rng);
  for (Index a = 0; a < 50; ++a) CHECK(build_cluster(y, y, a, 7).train.front() == a);
}

TEST_CASE("standardization uses training moments") {
  Matrix t(3, 2), v(1, 2);
  t << 1, 5, 2, 5, 3, 5;
  v << 4, 6;
  standardize_coordinates(t, v);
  CHECK(t(0, 0) == doctest::Approx(-1.0));
  CHECK(t(2, 0) == doctest::Approx(1.0));
  CHECK(v(0, 0) == doctest::Approx(2.0));
  CHECK(t.col(1).isZero(0.0));
  CHECK(v(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("validation segments") {
  TrajectorySet set;
  set.states.resize(20, 1);
  for (Index i = 0; i < 20; ++i) set.states(i, 0) = static_cast<double>(i);
  set.derivatives = Matrix::Zero(20, 1);
  set.times.assign(20, 0.0);
  set.trajectory_starts = {0, 12};
  set.regime_labels.assign(20, 0);

  const Matrix near_end = validation_segment(set, 7, 10);
  CHECK(near_end.rows() == 5);
  CHECK(near_end(4, 0) == 11.0);
  CHECK(validation_segment(set, 3, 1).rows() == 1);
  CHECK(validation_segment(set, 3, 1)(0, 0) == 3.0);
  CHECK(validation_segment(set, 11, 10).rows() == 1);
  CHECK(validation_segment(set, 19, 10).rows() == 1);
  CHECK(validation_segment(set, 12, 3)(0, 0) == 12.0);
}

TEST_CASE("SIR segment equals the simulated days") {
  const auto set = simulate_sir({15, 10, 975}, {}, SirCalendar::school_year(), {}, 9);
  const Index start = 400;
  const Matrix z = validation_segment(set, start, 10);
  REQUIRE(z.rows() == 10);
  for (Index a = 0; a < 10; ++a) {
    CHECK(set.times[static_cast<std::size_t>(start + a)] == doctest::Approx(400.0 + a));
    CHECK(z.row(a) == set.states.row(start + a));
  }
}

TEST_CASE("hopper clusters away from the guard are regime pure") {
  HopperParams params;
  FixedStepOptions options;
  std::vector<TrajectorySet> runs;
  for (const Eigen::Vector2d ic : {Eigen::Vector2d(0.8, -0.1), Eigen::Vector2d(0.78, -0.1),
                                   Eigen::Vector2d(0.82, -0.1)}) {
    runs.push_back(simulate_hopper(ic, params, options));
  }
  const TrajectorySet set = concatenate(runs);
  const Matrix& y = set.states;
  Index checked = 0;
  for (Index a = 0; a < set.rows(); ++a) {
    if (std::abs(y(a, 0) - 1.0) <= 0.2) continue;
    ++checked;
    const auto pair = build_cluster(y, y, a, 30);
    for (Index i : pair.train) {
      CHECK(set.regime_labels[static_cast<std::size_t>(i)] ==
            set.regime_labels[static_cast<std::size_t>(a)]);
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("clusters are deterministic") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix y(100, 2);
  for (Index i = 0; i < y.size(); ++i) y.data()[i] = u(rng);
  for (Index a = 0; a < 100; a += 9) {
    const auto p1 = build_cluster(y, y, a, 15);
    const auto p2 = build_cluster(y, y, a, 15);
    CHECK(p1.train == p2.train);
    CHECK(p1.validation == p2.validation);
  }
}

}  // TEST_SUITE
