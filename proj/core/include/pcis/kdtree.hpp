#pragma once

#include "pcis/types.hpp"

#include <vector>

namespace pcis {

// Exact k-d tree over the rows of a point matrix (any dimensionality).
// Queries are exact, not approximate: equal distances are broken by
// ascending point index, so results are deterministic and can be compared
// row-for-row against a brute-force scan.
class KdTree {
 public:
  explicit KdTree(const Mat& points);

  // Indices of the k nearest points to q, ascending distance, ties by
  // ascending index. exclude (when >= 0) is never returned.
  std::vector<int> nearest(const Eigen::Ref<const Vec>& q, int k, int exclude = -1) const;

  // Indices of all points with distance(q, p) <= radius, ascending index.
  std::vector<int> radius(const Eigen::Ref<const Vec>& q, double r) const;

  int size() const { return static_cast<int>(points_.rows()); }

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int axis = -1;        // -1 marks a leaf
    double split = 0.0;
    int begin = 0, end = 0;  // leaf range into order_
  };

  int build(int begin, int end, int depth);

  const Mat points_;         // own a copy; rows addressed by original index
  std::vector<int> order_;   // permutation of point indices, leaves are ranges
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 16;
};

}  // namespace pcis
