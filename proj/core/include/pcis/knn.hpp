#pragma once

#include "pcis/types.hpp"

namespace pcis {

// Fixed spatial neighborhood structure, built once per scene from point
// coordinates and shared by every graph convolution layer.
struct KnnGraph {
  // Row i holds the k nearest points to point i (self excluded), sorted by
  // ascending Euclidean distance, equal distances by ascending index.
  Eigen::MatrixXi neighbors;  // N x k
  int k = 0;

  int num_points() const { return static_cast<int>(neighbors.rows()); }
};

// Exact k-nearest-neighbor graph over coords (k-d tree backed).
// Throws DataError when N <= k (no k distinct non-self neighbors exist).
KnnGraph build_knn_graph(const Mat& coords, int k);

}  // namespace pcis
