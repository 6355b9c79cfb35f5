#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hsindy/common.hpp"
#include "hsindy/dynamics.hpp"

namespace hsindy {

// Columns of [X  X'] (states first, then derivatives) used as clustering
// coordinates. Throws std::invalid_argument on an empty or out-of-range list.
Matrix select_coordinates(const TrajectorySet& set, std::span<const Index> columns);

// The K rows of `points` nearest to `query` in Euclidean distance, nearest
// first, ties broken by lower row index. When `pinned` is given that row is
// placed first regardless of distance.
std::vector<Index> nearest_rows(const Matrix& points, const RowVector& query, Index count,
                                std::optional<Index> pinned = std::nullopt);

struct ClusterPair {
  Index anchor = 0;
  std::vector<Index> train;       // K rows of Y_T, anchor first
  RowVector centroid;             // mean of Y_T over `train`
  std::vector<Index> validation;  // K rows of Y_V nearest the centroid
};

ClusterPair build_cluster(const Matrix& train_coordinates,
                          const Matrix& validation_coordinates, Index anchor, Index count);

// Per-column z-scoring with the training mean and standard deviation,
// applied in place to both coordinate sets. Constant columns are centred only.
void standardize_coordinates(Matrix& train_coordinates, Matrix& validation_coordinates);

// Up to q consecutive state rows starting at `start_row`, cut at the end of
// the trajectory containing it.
Matrix validation_segment(const TrajectorySet& set, Index start_row, Index q);

}  // namespace hsindy
