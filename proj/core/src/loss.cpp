#include "pcis/loss.hpp"

#include <cmath>
#include <sstream>

namespace pcis {

InstanceStats compute_instance_stats(const Scene& scene, const Mat& embeddings,
                                     const LossConfig& cfg) {
  InstanceStats stats;
  stats.num_points = scene.num_points();
  stats.embed_dim = static_cast<int>(embeddings.cols());
  const int m = scene.num_instances();
  stats.instances.resize(m);
  if (m == 0) return stats;

  const int f = stats.embed_dim;
  for (int i = 0; i < stats.num_points; ++i) {
    const int id = scene.instance_ids[i];
    if (id >= 0) stats.instances[id].point_indices.push_back(i);
  }

  for (auto& inst : stats.instances) {
    const int count = static_cast<int>(inst.point_indices.size());
    inst.spatial_center.setZero();
    inst.embedding_mean = Vec::Zero(f);
    for (int idx : inst.point_indices) {
      inst.spatial_center += scene.coords.row(idx).transpose();
      inst.embedding_mean += embeddings.row(idx).transpose();
    }
    inst.spatial_center /= count;
    inst.embedding_mean /= count;

    inst.spatial_distances.resize(count);
    inst.structure_weights.resize(count);
    inst.embedding_distances.resize(count);
    inst.embedding_residuals.resize(count, f);
    for (int j = 0; j < count; ++j) {
      const int idx = inst.point_indices[j];
      const double d = (scene.coords.row(idx).transpose() - inst.spatial_center).norm();
      inst.spatial_distances[j] = d;
      inst.structure_weights[j] = cfg.structure_weighting == StructureWeighting::kUniform
                                      ? 1.0
                                      : 1.0 / (1.0 + std::exp(-d));
      inst.embedding_residuals.row(j) =
          embeddings.row(idx) - inst.embedding_mean.transpose();
      inst.embedding_distances[j] = inst.embedding_residuals.row(j).norm();
    }
  }
  return stats;
}

LossValueGrad intra_loss(const InstanceStats& stats, const LossConfig& cfg) {
  LossValueGrad out;
  out.grad_embeddings = Mat::Zero(stats.num_points, stats.embed_dim);
  const int m = stats.num_instances();
  if (m == 0) return out;

  for (const auto& inst : stats.instances) {
    const int count = static_cast<int>(inst.point_indices.size());
    const double norm =
        cfg.intra_normalization == IntraNormalization::kMean ? 1.0 / count : 1.0;
    const double scale = norm / m;

    // Per member j: coeff c_j = scale * w_j * 2 * max(s_j - alpha, 0) and
    // unit direction u_j from the mean to the member (0 at s_j = 0). The
    // member gradient is c_j u_j minus the average of all c u, the latter
    // being the mean embedding's own dependence on every member.
    double term = 0.0;
    Mat pulls(count, stats.embed_dim);
    for (int j = 0; j < count; ++j) {
      const double s = inst.embedding_distances[j];
      const double excess = s - cfg.alpha;
      if (excess <= 0.0) {
        pulls.row(j).setZero();
        continue;
      }
      term += inst.structure_weights[j] * excess * excess;
      if (s == 0.0) {
        pulls.row(j).setZero();
        continue;
      }
      const double c = scale * inst.structure_weights[j] * 2.0 * excess;
      pulls.row(j) = (c / s) * inst.embedding_residuals.row(j);
    }
    out.value += scale * term;

    const Eigen::RowVectorXd mean_pull = pulls.colwise().sum() / count;
    for (int j = 0; j < count; ++j)
      out.grad_embeddings.row(inst.point_indices[j]) += pulls.row(j) - mean_pull;
  }
  return out;
}

LossValueGrad inter_loss(const InstanceStats& stats, const LossConfig& cfg) {
  LossValueGrad out;
  out.grad_embeddings = Mat::Zero(stats.num_points, stats.embed_dim);
  const int m = stats.num_instances();
  if (m < 2) return out;

  const double scale = 1.0 / (static_cast<double>(m) * (m - 1));
  std::vector<Vec> mean_grads(m, Vec::Zero(stats.embed_dim));

  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      const Vec diff = stats.instances[i].embedding_mean - stats.instances[j].embedding_mean;
      const double dist = diff.norm();
      const double margin = cfg.beta - dist;
      if (margin <= 0.0) continue;
      out.value += scale * margin * margin;
      if (dist == 0.0) continue;  // direction undefined, subgradient 0
      mean_grads[i] += scale * (-2.0 * margin / dist) * diff;
    }
  }

  for (int i = 0; i < m; ++i) {
    const auto& inst = stats.instances[i];
    const Eigen::RowVectorXd per_member =
        mean_grads[i].transpose() / static_cast<double>(inst.point_indices.size());
    for (int idx : inst.point_indices) out.grad_embeddings.row(idx) += per_member;
  }
  return out;
}

LossValueGrad structure_aware_loss(const Scene& scene, const Mat& embeddings,
                                   const LossConfig& cfg) {
  const InstanceStats stats = compute_instance_stats(scene, embeddings, cfg);
  LossValueGrad intra = intra_loss(stats, cfg);
  const LossValueGrad inter = inter_loss(stats, cfg);
  intra.value += inter.value;
  intra.grad_embeddings += inter.grad_embeddings;
  return intra;
}

CrossEntropyResult cross_entropy(const Mat& logits, const IntVec& labels,
                                 const std::vector<std::uint8_t>& mask) {
  const int n = static_cast<int>(logits.rows());
  const int c = static_cast<int>(logits.cols());
  CrossEntropyResult out;
  out.grad_logits = Mat::Zero(n, c);

  int active = 0;
  for (int i = 0; i < n; ++i)
    if (mask.empty() || mask[i]) ++active;
  if (active == 0) return out;

  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const int label = labels[i];
    if (label < 0 || label >= c) {
      std::ostringstream os;
      os << "cross_entropy: label " << label << " outside [0," << c << ") at point " << i;
      throw DataError(os.str());
    }
    const double mx = logits.row(i).maxCoeff();
    const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
    total += lse - logits(i, label);

    out.grad_logits.row(i) = ((logits.row(i).array() - lse).exp() / active).matrix();
    out.grad_logits(i, label) -= 1.0 / active;
  }
  out.value = total / active;
  return out;
}

TotalLossResult total_training_loss(const Scene& scene, const Mat& logits,
                                    const Mat& initial_embeddings,
                                    const Mat& refined_embeddings, const LossConfig& cfg) {
  TotalLossResult out;
  const CrossEntropyResult ce = cross_entropy(logits, scene.semantic_labels);
  LossValueGrad sal_init = structure_aware_loss(scene, initial_embeddings, cfg);
  LossValueGrad sal_refined = structure_aware_loss(scene, refined_embeddings, cfg);

  out.cross_entropy = ce.value;
  out.structure_initial = sal_init.value;
  out.structure_refined = sal_refined.value;
  out.value = ce.value + sal_init.value + sal_refined.value;
  out.grad_logits = ce.grad_logits;
  out.grad_initial = std::move(sal_init.grad_embeddings);
  out.grad_refined = std::move(sal_refined.grad_embeddings);
  return out;
}

}  // namespace pcis
