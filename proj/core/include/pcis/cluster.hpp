#pragma once

#include "pcis/types.hpp"

#include <vector>

namespace pcis {

struct ClusterResult {
  // -1 = discarded (cluster below min_cluster_points), else 0..K-1.
  IntVec assignments;
  Mat modes;  // K x F, one row per surviving cluster
  std::vector<int> iterations_used;  // per seed

  int num_clusters() const { return static_cast<int>(modes.rows()); }
};

// Flat-kernel mean shift over embedding rows. Every point seeds a trajectory
// that repeatedly moves to the mean of all points within bandwidth until the
// shift drops below shift_tolerance or max_iterations is hit. Converged modes
// within merge_radius are merged (union-find, lowest seed index first), each
// point is assigned to its nearest surviving mode (ties to the lower cluster
// id), and clusters with fewer than min_cluster_points members are discarded.
// Cluster ids are consecutive after discarding.
ClusterResult mean_shift(const Mat& embeddings, const ClusterConfig& cfg);

// One prediction per cluster: majority vote over per-point argmax logits
// (ties to the lower class id); confidence is the mean over members of the
// max softmax probability.
std::vector<InstancePrediction> clusters_to_predictions(const ClusterResult& result,
                                                        const Mat& logits);

}  // namespace pcis
