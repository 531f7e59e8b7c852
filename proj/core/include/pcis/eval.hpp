#pragma once

#include "pcis/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace pcis {

// Ground-truth view of one scene's instances.
struct SceneGroundTruth {
  std::string scene_id;
  // Per GT instance: its point indices (ascending) and semantic class.
  std::vector<std::vector<int>> instance_points;
  std::vector<int> instance_classes;
  IntVec semantic_labels;  // per point
};

SceneGroundTruth ground_truth_from_scene(const Scene& scene);

struct ScenePredictions {
  std::string scene_id;
  std::vector<InstancePrediction> predictions;
  IntVec semantic_labels;  // per-point predicted labels (argmax)
};

struct EvalResult {
  std::vector<double> thresholds;
  // ap[t][c] = AP of class c at thresholds[t]; NaN when the class has no GT
  // instance anywhere (excluded from the mean).
  std::vector<std::vector<double>> ap;
  std::vector<double> mean_ap;     // per threshold, over classes with GT
  std::vector<double> class_iou;   // NaN when class absent from GT and preds
  double mean_iou = 0.0;           // over classes present in GT
  std::vector<long long> tp, fp, fn;  // semantic per-class point counts
};

// |a n b| / |a u b| over point index sets. Throws DataError when both empty.
double point_iou(const std::vector<int>& a, const std::vector<int>& b);

// Detection-style AP for one class at one IoU threshold: predictions pooled
// across scenes, sorted by descending confidence (ties by scene id then by
// position in the scene's prediction list), each greedily matched to the
// unmatched same-scene GT instance with the highest IoU; a match counts as TP
// when that IoU >= threshold. AP is the area under the precision envelope
// (all-point interpolation). Returns NaN when the class has no GT instance.
double average_precision(const std::vector<ScenePredictions>& predictions,
                         const std::vector<SceneGroundTruth>& ground_truth, int cls,
                         double iou_threshold);

struct MiouResult {
  std::vector<double> class_iou;
  double mean_iou = 0.0;
  std::vector<long long> tp, fp, fn;
};

// Point-wise semantic IoU pooled over scenes; the mean skips classes with no
// GT point.
MiouResult semantic_miou(const std::vector<ScenePredictions>& predictions,
                         const std::vector<SceneGroundTruth>& ground_truth,
                         int num_classes);

// AP per class and threshold plus semantic mIoU, in one pass.
EvalResult evaluate(const std::vector<ScenePredictions>& predictions,
                    const std::vector<SceneGroundTruth>& ground_truth, int num_classes,
                    const std::vector<double>& thresholds);

}  // namespace pcis
