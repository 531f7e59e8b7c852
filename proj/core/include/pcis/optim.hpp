#pragma once

#include "pcis/loss.hpp"
#include "pcis/model.hpp"

#include <cstdint>
#include <vector>

namespace pcis {

// Adam with bias correction and a constant learning rate.
struct AdamState {
  long long step = 0;
  ModelParams first_moment;   // shaped like the parameters, zero-initialized
  ModelParams second_moment;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState init(const ModelParams& params, double lr = 0.001);
};

// One in-place update. Throws NumericError naming the parameter group when a
// gradient is non-finite.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state);

struct EpochStats {
  double mean_cross_entropy = 0.0;
  double mean_structure_initial = 0.0;
  double mean_structure_refined = 0.0;
  double mean_total = 0.0;
  double wall_seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
};

struct TrainConfig {
  int epochs = 40;
  double lr = 0.001;
  // Optional two-phase schedule: the first pretrain_epochs epochs train the
  // semantic path only (cross entropy); the rest use the full loss.
  // 0 = joint training throughout (the default).
  int pretrain_epochs = 0;
  // Optional max-norm gradient clip; 0 disables it.
  double grad_clip = 0.0;
};

// Per-scene stochastic training: each epoch visits the scenes in a
// seed-shuffled order and applies forward / total loss / backward / Adam one
// scene at a time. Scenes without instances contribute cross entropy only.
// Deterministic: a fixed (dataset, configs, seed) reproduces parameters and
// report bitwise.
struct TrainResult {
  ModelParams params;
  TrainReport report;
};

TrainResult train(const std::vector<Scene>& dataset, const std::vector<KnnGraph>& graphs,
                  const ModelConfig& model_cfg, const LossConfig& loss_cfg,
                  const TrainConfig& train_cfg, std::uint64_t seed);

}  // namespace pcis
