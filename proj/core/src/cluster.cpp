#include "pcis/cluster.hpp"

#include "pcis/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace pcis {
namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

// Union keeping the smaller index as root.
void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a == b) return;
  if (a < b)
    parent[b] = a;
  else
    parent[a] = b;
}

}  // namespace

ClusterResult mean_shift(const Mat& embeddings, const ClusterConfig& cfg) {
  const int n = static_cast<int>(embeddings.rows());
  const int f = static_cast<int>(embeddings.cols());
  if (n < 1) throw DataError("mean_shift: empty input");
  if (!embeddings.allFinite()) throw DataError("mean_shift: non-finite embeddings");

  const KdTree tree(embeddings);
  Mat converged(n, f);
  ClusterResult result;
  result.iterations_used.resize(n, 0);

  Vec pos(f), mean(f);
  for (int seed = 0; seed < n; ++seed) {
    pos = embeddings.row(seed).transpose();
    int iter = 0;
    while (iter < cfg.max_iterations) {
      const std::vector<int> within = tree.radius(pos, cfg.bandwidth);
      ++iter;
      if (within.empty()) break;  // cannot happen while pos sits on a point
      mean.setZero();
      for (int idx : within) mean += embeddings.row(idx).transpose();
      mean /= static_cast<double>(within.size());
      const double shift = (mean - pos).norm();
      pos = mean;
      if (shift < cfg.shift_tolerance) break;
    }
    converged.row(seed) = pos.transpose();
    result.iterations_used[seed] = iter;
  }

  // Merge converged modes within merge_radius of each other.
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const KdTree mode_tree(converged);
  for (int i = 0; i < n; ++i) {
    for (int j : mode_tree.radius(converged.row(i).transpose(), cfg.merge_radius)) {
      if (j > i) unite(parent, i, j);
    }
  }

  // Group ids in ascending root order; group mode = mean of member modes.
  std::map<int, int> root_to_group;
  for (int i = 0; i < n; ++i) {
    const int root = find_root(parent, i);
    root_to_group.emplace(root, 0);
  }
  int next_group = 0;
  for (auto& [root, group] : root_to_group) group = next_group++;

  Mat group_modes = Mat::Zero(next_group, f);
  std::vector<int> group_sizes(next_group, 0);
  for (int i = 0; i < n; ++i) {
    const int g = root_to_group.at(find_root(parent, i));
    group_modes.row(g) += converged.row(i);
    group_sizes[g] += 1;
  }
  for (int g = 0; g < next_group; ++g) group_modes.row(g) /= group_sizes[g];

  // Assign every point to its nearest group mode, ties to the lower id.
  IntVec nearest_group(n);
  std::vector<int> member_counts(next_group, 0);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_d2 = (group_modes.row(0) - embeddings.row(i)).squaredNorm();
    for (int g = 1; g < next_group; ++g) {
      const double d2 = (group_modes.row(g) - embeddings.row(i)).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = g;
      }
    }
    nearest_group[i] = best;
    member_counts[best] += 1;
  }

  // Drop clusters below min_cluster_points and renumber the survivors.
  std::vector<int> new_id(next_group, -1);
  int kept = 0;
  for (int g = 0; g < next_group; ++g)
    if (member_counts[g] >= cfg.min_cluster_points) new_id[g] = kept++;

  result.assignments.resize(n);
  for (int i = 0; i < n; ++i) result.assignments[i] = new_id[nearest_group[i]];
  result.modes.resize(kept, f);
  for (int g = 0; g < next_group; ++g)
    if (new_id[g] >= 0) result.modes.row(new_id[g]) = group_modes.row(g);
  return result;
}

std::vector<InstancePrediction> clusters_to_predictions(const ClusterResult& result,
                                                        const Mat& logits) {
  const int n = static_cast<int>(logits.rows());
  const int c = static_cast<int>(logits.cols());
  if (static_cast<int>(result.assignments.size()) != n)
    throw DataError("clusters_to_predictions: assignment/logit row mismatch");

  const int k = result.num_clusters();
  std::vector<InstancePrediction> preds(k);
  std::vector<std::vector<int>> votes(k, std::vector<int>(c, 0));

  for (int i = 0; i < n; ++i) {
    const int cluster = result.assignments[i];
    if (cluster < 0) continue;
    preds[cluster].point_indices.push_back(i);

    int arg = 0;
    double best = logits(i, 0);
    for (int j = 1; j < c; ++j) {
      if (logits(i, j) > best) {
        best = logits(i, j);
        arg = j;
      }
    }
    votes[cluster][arg] += 1;

    // max softmax probability, computed stably
    const double mx = logits.row(i).maxCoeff();
    const double denom = (logits.row(i).array() - mx).exp().sum();
    preds[cluster].confidence += 1.0 / denom;  // exp(mx - mx) / denom
  }

  for (int g = 0; g < k; ++g) {
    auto& p = preds[g];
    const int count = static_cast<int>(p.point_indices.size());
    p.confidence = count > 0 ? p.confidence / count : 0.0;
    p.class_label = static_cast<int>(
        std::max_element(votes[g].begin(), votes[g].end()) - votes[g].begin());
  }
  return preds;
}

}  // namespace pcis
