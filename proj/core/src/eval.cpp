#include "pcis/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcis {

SceneGroundTruth ground_truth_from_scene(const Scene& scene) {
  SceneGroundTruth gt;
  gt.scene_id = scene.id;
  gt.semantic_labels = scene.semantic_labels;
  const int m = scene.num_instances();
  gt.instance_points.resize(m);
  gt.instance_classes.assign(m, 0);
  for (int i = 0; i < scene.num_points(); ++i) {
    const int id = scene.instance_ids[i];
    if (id >= 0) {
      gt.instance_points[id].push_back(i);
      gt.instance_classes[id] = scene.semantic_labels[i];
    }
  }
  return gt;
}

double point_iou(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() && b.empty())
    throw DataError("point_iou: both sets empty");
  // inputs are ascending index lists
  std::size_t i = 0, j = 0;
  long long inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const long long uni = static_cast<long long>(a.size()) + static_cast<long long>(b.size()) - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

struct PooledPrediction {
  int scene = 0;       // index into the scene list
  int rank = 0;        // position within the scene's prediction list
  double confidence = 0.0;
  const InstancePrediction* pred = nullptr;
};

// Confidence-descending pool of class-c predictions with the documented tie
// rule (scene id, then in-scene position).
std::vector<PooledPrediction> pool_class_predictions(
    const std::vector<ScenePredictions>& predictions, int cls) {
  std::vector<PooledPrediction> pool;
  for (int s = 0; s < static_cast<int>(predictions.size()); ++s) {
    const auto& scene = predictions[s];
    for (int r = 0; r < static_cast<int>(scene.predictions.size()); ++r) {
      if (scene.predictions[r].class_label == cls)
        pool.push_back({s, r, scene.predictions[r].confidence, &scene.predictions[r]});
    }
  }
  std::sort(pool.begin(), pool.end(), [&](const PooledPrediction& a, const PooledPrediction& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.scene != b.scene)
      return predictions[a.scene].scene_id < predictions[b.scene].scene_id;
    return a.rank < b.rank;
  });
  return pool;
}

}  // namespace

double average_precision(const std::vector<ScenePredictions>& predictions,
                         const std::vector<SceneGroundTruth>& ground_truth, int cls,
                         double iou_threshold) {
  if (predictions.size() != ground_truth.size())
    throw DataError("average_precision: prediction/ground-truth scene count mismatch");

  long long num_gt = 0;
  for (const auto& gt : ground_truth)
    for (int c : gt.instance_classes)
      if (c == cls) ++num_gt;
  if (num_gt == 0) return std::numeric_limits<double>::quiet_NaN();

  const std::vector<PooledPrediction> pool = pool_class_predictions(predictions, cls);

  // Greedy matching in confidence order; each GT instance is used once.
  std::vector<std::vector<char>> used(ground_truth.size());
  for (std::size_t s = 0; s < ground_truth.size(); ++s)
    used[s].assign(ground_truth[s].instance_points.size(), 0);

  std::vector<char> is_tp(pool.size(), 0);
  for (std::size_t p = 0; p < pool.size(); ++p) {
    const auto& entry = pool[p];
    const auto& gt = ground_truth[entry.scene];
    double best_iou = -1.0;
    int best_gt = -1;
    for (std::size_t g = 0; g < gt.instance_points.size(); ++g) {
      if (used[entry.scene][g] || gt.instance_classes[g] != cls) continue;
      const double iou = point_iou(entry.pred->point_indices, gt.instance_points[g]);
      if (iou > best_iou) {
        best_iou = iou;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0 && best_iou >= iou_threshold) {
      is_tp[p] = 1;
      used[entry.scene][best_gt] = 1;
    }
  }

  // Precision-recall points, then the area under the precision envelope.
  long long tp = 0, fp = 0;
  std::vector<double> precision(pool.size()), recall(pool.size());
  for (std::size_t p = 0; p < pool.size(); ++p) {
    if (is_tp[p])
      ++tp;
    else
      ++fp;
    precision[p] = static_cast<double>(tp) / static_cast<double>(tp + fp);
    recall[p] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }

  double ap = 0.0;
  double envelope = 0.0;
  double prev_recall = 0.0;
  // Walk forward; the envelope at step p is the max precision at recall >=
  // recall[p], computed by a reverse sweep.
  std::vector<double> env(pool.size());
  for (int p = static_cast<int>(pool.size()) - 1; p >= 0; --p) {
    envelope = std::max(envelope, precision[p]);
    env[p] = envelope;
  }
  for (std::size_t p = 0; p < pool.size(); ++p) {
    ap += (recall[p] - prev_recall) * env[p];
    prev_recall = recall[p];
  }
  return ap;
}

MiouResult semantic_miou(const std::vector<ScenePredictions>& predictions,
                         const std::vector<SceneGroundTruth>& ground_truth,
                         int num_classes) {
  if (predictions.size() != ground_truth.size())
    throw DataError("semantic_miou: prediction/ground-truth scene count mismatch");

  MiouResult out;
  out.tp.assign(num_classes, 0);
  out.fp.assign(num_classes, 0);
  out.fn.assign(num_classes, 0);
  std::vector<long long> gt_count(num_classes, 0);

  for (std::size_t s = 0; s < predictions.size(); ++s) {
    const auto& pred = predictions[s].semantic_labels;
    const auto& gt = ground_truth[s].semantic_labels;
    if (pred.size() != gt.size())
      throw DataError("semantic_miou: label length mismatch in scene " +
                      ground_truth[s].scene_id);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      ++gt_count[gt[i]];
      if (pred[i] == gt[i]) {
        ++out.tp[gt[i]];
      } else {
        ++out.fp[pred[i]];
        ++out.fn[gt[i]];
      }
    }
  }

  out.class_iou.assign(num_classes, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < num_classes; ++c) {
    const long long denom = out.tp[c] + out.fp[c] + out.fn[c];
    if (denom > 0)
      out.class_iou[c] = static_cast<double>(out.tp[c]) / static_cast<double>(denom);
    if (gt_count[c] > 0) {
      sum += out.class_iou[c];
      ++present;
    }
  }
  out.mean_iou = present > 0 ? sum / present : 0.0;
  return out;
}

EvalResult evaluate(const std::vector<ScenePredictions>& predictions,
                    const std::vector<SceneGroundTruth>& ground_truth, int num_classes,
                    const std::vector<double>& thresholds) {
  EvalResult out;
  out.thresholds = thresholds;
  out.ap.resize(thresholds.size());
  out.mean_ap.resize(thresholds.size());

  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    out.ap[t].resize(num_classes);
    double sum = 0.0;
    int counted = 0;
    for (int c = 0; c < num_classes; ++c) {
      const double ap = average_precision(predictions, ground_truth, c, thresholds[t]);
      out.ap[t][c] = ap;
      if (!std::isnan(ap)) {
        sum += ap;
        ++counted;
      }
    }
    out.mean_ap[t] = counted > 0 ? sum / counted : 0.0;
  }

  const MiouResult miou = semantic_miou(predictions, ground_truth, num_classes);
  out.class_iou = miou.class_iou;
  out.mean_iou = miou.mean_iou;
  out.tp = miou.tp;
  out.fp = miou.fp;
  out.fn = miou.fn;
  return out;
}

}  // namespace pcis
