#include "pcis/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace pcis {
namespace {

// Max-heap entry: the worst current candidate sits on top. A candidate is
// worse when its distance is larger, or equal with a larger index.
struct Candidate {
  double dist2;
  int index;
  bool operator<(const Candidate& o) const {
    if (dist2 != o.dist2) return dist2 < o.dist2;
    return index < o.index;
  }
};

}  // namespace

KdTree::KdTree(const Mat& points) : points_(points) {
  const int n = static_cast<int>(points_.rows());
  order_.resize(n);
  for (int i = 0; i < n; ++i) order_[i] = i;
  if (n > 0) {
    nodes_.reserve(2 * n / kLeafSize + 8);
    root_ = build(0, n, 0);
  }
}

int KdTree::build(int begin, int end, int depth) {
  const int node_index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();

  if (end - begin <= kLeafSize) {
    nodes_[node_index].begin = begin;
    nodes_[node_index].end = end;
    return node_index;
  }

  // Split on the axis with the widest spread; ties on coordinate are ordered
  // by point index so the layout is deterministic.
  const int dim = static_cast<int>(points_.cols());
  int axis = 0;
  double best_spread = -1.0;
  for (int a = 0; a < dim; ++a) {
    double lo = points_(order_[begin], a), hi = lo;
    for (int i = begin + 1; i < end; ++i) {
      const double v = points_(order_[i], a);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      axis = a;
    }
  }

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double va = points_(a, axis), vb = points_(b, axis);
                     if (va != vb) return va < vb;
                     return a < b;
                   });

  nodes_[node_index].axis = axis;
  nodes_[node_index].split = points_(order_[mid], axis);
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[node_index].left = left;
  nodes_[node_index].right = right;
  return node_index;
}

std::vector<int> KdTree::nearest(const Eigen::Ref<const Vec>& q, int k, int exclude) const {
  std::priority_queue<Candidate> heap;  // holds at most k candidates

  auto consider = [&](int idx) {
    if (idx == exclude) return;
    const double d2 = (points_.row(idx).transpose() - q).squaredNorm();
    const Candidate c{d2, idx};
    if (static_cast<int>(heap.size()) < k) {
      heap.push(c);
    } else if (c < heap.top()) {
      heap.pop();
      heap.push(c);
    }
  };

  // Depth-first, near side first; prune a subtree only when the splitting
  // plane is strictly farther than the current worst candidate (equality must
  // recurse so an equal-distance lower index can still win the tie).
  auto visit = [&](auto&& self, int node_index) -> void {
    const Node& node = nodes_[node_index];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) consider(order_[i]);
      return;
    }
    const double delta = q[node.axis] - node.split;
    const int near = delta <= 0.0 ? node.left : node.right;
    const int far = delta <= 0.0 ? node.right : node.left;
    self(self, near);
    if (static_cast<int>(heap.size()) < k || delta * delta <= heap.top().dist2)
      self(self, far);
  };
  if (root_ >= 0) visit(visit, root_);

  std::vector<Candidate> sorted;
  sorted.reserve(heap.size());
  while (!heap.empty()) {
    sorted.push_back(heap.top());
    heap.pop();
  }
  std::vector<int> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out[sorted.size() - 1 - i] = sorted[i].index;  // heap pops worst first
  return out;
}

std::vector<int> KdTree::radius(const Eigen::Ref<const Vec>& q, double r) const {
  std::vector<int> out;
  const double r2 = r * r;

  auto visit = [&](auto&& self, int node_index) -> void {
    const Node& node = nodes_[node_index];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        if ((points_.row(idx).transpose() - q).squaredNorm() <= r2) out.push_back(idx);
      }
      return;
    }
    const double delta = q[node.axis] - node.split;
    if (delta <= 0.0) {
      self(self, node.left);
      if (delta * delta <= r2) self(self, node.right);
    } else {
      self(self, node.right);
      if (delta * delta <= r2) self(self, node.left);
    }
  };
  if (root_ >= 0) visit(visit, root_);

  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pcis
