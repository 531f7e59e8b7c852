#include "pcis/optim.hpp"

#include "pcis/rng.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace pcis {

AdamState AdamState::init(const ModelParams& params, double lr) {
  AdamState state;
  state.lr = lr;
  state.first_moment = zeros_like(params);
  state.second_moment = zeros_like(params);
  return state;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  auto param_refs = tensor_refs(params);
  auto grad_refs = tensor_refs(const_cast<ModelParams&>(grads));
  auto m_refs = tensor_refs(state.first_moment);
  auto v_refs = tensor_refs(state.second_moment);

  for (std::size_t t = 0; t < param_refs.size(); ++t) {
    double* p = param_refs[t].data;
    const double* g = grad_refs[t].data;
    double* m = m_refs[t].data;
    double* v = v_refs[t].data;
    const Eigen::Index size = param_refs[t].size;

    for (Eigen::Index i = 0; i < size; ++i) {
      if (!std::isfinite(g[i]))
        throw NumericError("adam_step: non-finite gradient in " + param_refs[t].name);
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

namespace {

double grad_norm(const ModelParams& grads) {
  double sq = 0.0;
  for (const auto& ref : tensor_refs(const_cast<ModelParams&>(grads)))
    for (Eigen::Index i = 0; i < ref.size; ++i) sq += ref.data[i] * ref.data[i];
  return std::sqrt(sq);
}

void scale_grads(ModelParams& grads, double factor) {
  for (auto& ref : tensor_refs(grads))
    for (Eigen::Index i = 0; i < ref.size; ++i) ref.data[i] *= factor;
}

}  // namespace

TrainResult train(const std::vector<Scene>& dataset, const std::vector<KnnGraph>& graphs,
                  const ModelConfig& model_cfg, const LossConfig& loss_cfg,
                  const TrainConfig& train_cfg, std::uint64_t seed) {
  if (dataset.empty()) throw DataError("train: empty dataset");
  if (graphs.size() != dataset.size())
    throw DataError("train: need one precomputed KNN graph per scene");

  TrainResult result;
  result.params = init_params(model_cfg, seed);
  check_shapes(result.params, model_cfg);
  AdamState state = AdamState::init(result.params, train_cfg.lr);

  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  ForwardTrace trace;
  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const bool pretrain = epoch < train_cfg.pretrain_epochs;

    Rng shuffle_rng = Rng::for_stream(seed, 1 + static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    EpochStats stats;
    for (int scene_index : order) {
      const Scene& scene = dataset[scene_index];
      const KnnGraph& graph = graphs[scene_index];

      const ModelOutput out = model_forward(scene, graph, result.params, trace);
      TotalLossResult loss = total_training_loss(scene, out.logits, out.initial_embeddings,
                                                 out.refined_embeddings, loss_cfg);
      if (pretrain) {
        loss.grad_initial.setZero();
        loss.grad_refined.setZero();
      }

      ModelParams grads = model_backward(trace, loss.grad_logits, loss.grad_initial,
                                         loss.grad_refined, graph, result.params);
      if (train_cfg.grad_clip > 0.0) {
        const double norm = grad_norm(grads);
        if (norm > train_cfg.grad_clip) scale_grads(grads, train_cfg.grad_clip / norm);
      }
      adam_step(result.params, grads, state);

      stats.mean_cross_entropy += loss.cross_entropy;
      stats.mean_structure_initial += loss.structure_initial;
      stats.mean_structure_refined += loss.structure_refined;
      stats.mean_total += loss.value;
    }

    const double inv = 1.0 / static_cast<double>(dataset.size());
    stats.mean_cross_entropy *= inv;
    stats.mean_structure_initial *= inv;
    stats.mean_structure_refined *= inv;
    stats.mean_total *= inv;
    stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.report.epochs.push_back(stats);
  }
  return result;
}

}  // namespace pcis
