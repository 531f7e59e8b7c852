#pragma once

#include "pcis/types.hpp"

namespace pcis {

// Per-instance statistics shared by the embedding loss terms. Points with
// instance id -1 are excluded everywhere.
struct InstanceStats {
  struct Instance {
    std::vector<int> point_indices;  // N_i entries
    Eigen::Vector3d spatial_center;  // mean member coordinate
    Vec spatial_distances;           // N_i, distance to spatial_center
    Vec structure_weights;           // N_i, sigmoid(distance) or all 1
    Vec embedding_mean;              // F
    Vec embedding_distances;         // N_i, distance to embedding_mean
    Mat embedding_residuals;         // N_i x F, member embedding minus mean
  };
  std::vector<Instance> instances;  // indexed by instance id, size M
  int num_points = 0;
  int embed_dim = 0;

  int num_instances() const { return static_cast<int>(instances.size()); }
};

struct LossValueGrad {
  double value = 0.0;
  Mat grad_embeddings;  // N x F
};

struct CrossEntropyResult {
  double value = 0.0;
  Mat grad_logits;  // N x C
};

struct TotalLossResult {
  double value = 0.0;
  double cross_entropy = 0.0;
  double structure_initial = 0.0;
  double structure_refined = 0.0;
  Mat grad_logits;
  Mat grad_initial;
  Mat grad_refined;
};

// M = 0 yields empty stats; the loss terms treat that as zero loss.
InstanceStats compute_instance_stats(const Scene& scene, const Mat& embeddings,
                                     const LossConfig& cfg);

// Weighted hinge on each member's distance to its instance's mean embedding,
// averaged over instances; per-instance sums are divided by N_i in mean mode.
// Gradients account for the mean's dependence on every member embedding; the
// distance gradient at zero distance is taken as 0.
LossValueGrad intra_loss(const InstanceStats& stats, const LossConfig& cfg);

// Hinge pushing instance mean embeddings at least beta apart, averaged over
// ordered pairs (1/(M(M-1))); zero when M < 2.
LossValueGrad inter_loss(const InstanceStats& stats, const LossConfig& cfg);

// intra + inter on embeddings computed against this scene's instances.
LossValueGrad structure_aware_loss(const Scene& scene, const Mat& embeddings,
                                   const LossConfig& cfg);

// Mean of -log softmax(logits)[label] over masked points (empty mask = all
// points). Throws DataError on an out-of-range label at a masked point.
CrossEntropyResult cross_entropy(const Mat& logits, const IntVec& labels,
                                 const std::vector<std::uint8_t>& mask = {});

// Cross entropy plus the embedding loss on both the initial and the refined
// embeddings, unit weights; gradients routed per head for model_backward.
TotalLossResult total_training_loss(const Scene& scene, const Mat& logits,
                                    const Mat& initial_embeddings,
                                    const Mat& refined_embeddings, const LossConfig& cfg);

}  // namespace pcis
