#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcis {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using IntVec = std::vector<int>;

// Bad input data (files, scenes, mismatched configs). CLI maps this to exit 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure (non-finite gradients, failed gradient check). Exit 4.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameter/config shape mismatch.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One labeled point cloud, the unit of training and inference.
// instance_ids uses -1 for "no instance"; present ids must be 0..M-1.
struct Scene {
  Mat coords;              // N x 3, meters
  Mat colors;              // N x 3, each channel in [0,1]
  IntVec semantic_labels;  // N, in [0, num_classes)
  IntVec instance_ids;     // N, -1 or 0..M-1
  int num_classes = 0;
  std::string id;

  int num_points() const { return static_cast<int>(coords.rows()); }
  // Largest instance id + 1 (0 when no point carries an instance).
  int num_instances() const;
};

struct ModelConfig {
  int embed_dim = 4;
  int num_classes = 4;
  std::vector<int> backbone_hidden = {64, 64};
  int attention_hidden = 16;
  int gcn_layers = 2;
  int knn_k = 8;
};

enum class IntraNormalization { kSum, kMean };
enum class StructureWeighting { kSigmoidDistance, kUniform };

struct LossConfig {
  double alpha = 0.7;
  double beta = 1.5;
  IntraNormalization intra_normalization = IntraNormalization::kMean;
  StructureWeighting structure_weighting = StructureWeighting::kSigmoidDistance;
};

struct ClusterConfig {
  double bandwidth = 1.0;
  double merge_radius = 0.5;       // bandwidth / 2
  double shift_tolerance = 1e-3;   // 1e-3 * bandwidth
  int max_iterations = 300;
  int min_cluster_points = 10;

  // Derive the bandwidth-relative defaults for a given bandwidth.
  static ClusterConfig with_bandwidth(double bw);
};

struct InstancePrediction {
  std::vector<int> point_indices;  // sorted ascending, non-empty
  int class_label = 0;
  double confidence = 0.0;
};

struct Violation {
  std::string field;
  std::ptrdiff_t index = -1;  // -1 when not tied to one point
  std::string reason;

  std::string to_string() const;
};

// Checks every Scene invariant; returns one entry per violation, empty when
// the scene is well formed. Never throws.
std::vector<Violation> validate_scene(const Scene& scene);

// Relabels instance ids to consecutive 0..M-1 (ascending original id order);
// -1 is preserved. Idempotent and partition-preserving.
Scene remap_instances(const Scene& scene);

std::string to_string(IntraNormalization v);
std::string to_string(StructureWeighting v);
IntraNormalization intra_normalization_from_string(const std::string& s);
StructureWeighting structure_weighting_from_string(const std::string& s);

}  // namespace pcis
