#include "hsindy/clustering.hpp"

#include <cmath>
#include <numeric>

namespace hsindy {

Matrix select_coordinates(const TrajectorySet& set, std::span<const Index> columns) {
  if (columns.empty()) throw std::invalid_argument("coordinate selection is empty");
  const Index n = set.dimension();
  Matrix y(set.rows(), static_cast<Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const Index col = columns[c];
    if (col < 0 || col >= 2 * n) {
      throw std::invalid_argument("coordinate column " + std::to_string(col) +
                                  " outside [0, " + std::to_string(2 * n) + ")");
    }
    y.col(static_cast<Index>(c)) = col < n ? set.states.col(col) : set.derivatives.col(col - n);
  }
  return y;
}

std::vector<Index> nearest_rows(const Matrix& points, const RowVector& query, Index count,
                                std::optional<Index> pinned) {
  const Index m = points.rows();
  if (count < 1 || count > m) {
    throw std::invalid_argument("cluster size " + std::to_string(count) +
                                " outside [1, " + std::to_string(m) + "]");
  }
  if (query.size() != points.cols()) throw std::invalid_argument("query dimension mismatch");

  std::vector<std::pair<double, Index>> keyed(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    keyed[i] = {(points.row(i) - query).squaredNorm(), i};
  }
  if (pinned) {
    if (*pinned < 0 || *pinned >= m) throw std::invalid_argument("pinned row out of range");
    keyed[*pinned].first = -1.0;
  }
  std::partial_sort(keyed.begin(), keyed.begin() + count, keyed.end());
  std::vector<Index> out(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) out[i] = keyed[i].second;
  return out;
}

ClusterPair build_cluster(const Matrix& train_coordinates,
                          const Matrix& validation_coordinates, Index anchor, Index count) {
  if (count > validation_coordinates.rows()) {
    throw std::invalid_argument("cluster size exceeds validation rows");
  }
  ClusterPair pair;
  pair.anchor = anchor;
  pair.train = nearest_rows(train_coordinates, train_coordinates.row(anchor), count, anchor);
  pair.centroid = RowVector::Zero(train_coordinates.cols());
  for (Index i : pair.train) pair.centroid += train_coordinates.row(i);
  pair.centroid /= static_cast<double>(count);
  pair.validation = nearest_rows(validation_coordinates, pair.centroid, count);
  return pair;
}

void standardize_coordinates(Matrix& train_coordinates, Matrix& validation_coordinates) {
  const Index m = train_coordinates.rows();
  for (Index c = 0; c < train_coordinates.cols(); ++c) {
    const double mean = train_coordinates.col(c).mean();
    const double var =
        m > 1 ? (train_coordinates.col(c).array() - mean).square().sum() / static_cast<double>(m - 1)
              : 0.0;
    const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
    train_coordinates.col(c) = (train_coordinates.col(c).array() - mean) / scale;
    validation_coordinates.col(c) = (validation_coordinates.col(c).array() - mean) / scale;
  }
}

Matrix validation_segment(const TrajectorySet& set, Index start_row, Index q) {
  if (q < 1) throw std::invalid_argument("segment length q must be >= 1");
  const Index end = set.trajectory_end(start_row);
  const Index length = std::min(q, end - start_row);
  return set.states.middleRows(start_row, length);
}

}  // namespace hsindy
