#pragma once

#include "pcis/knn.hpp"
#include "pcis/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pcis {

struct DenseLayer {
  Mat weight;  // in x out
  Vec bias;    // out
};

// One graph-convolution layer: a two-layer scorer f over concatenated
// [center ; neighbor] embeddings, and a bias-free linear updator applied to
// [center ; attention-weighted aggregate].
struct GcnLayerParams {
  DenseLayer f_hidden;  // 2F x H
  DenseLayer f_out;     // H x 1
  Mat updator;          // 2F x F, no bias
};

struct ModelParams {
  std::vector<DenseLayer> backbone;  // per-point MLP, ReLU between layers
  DenseLayer semantic_head;          // D x C
  DenseLayer embedding_head;         // D x F
  std::vector<GcnLayerParams> gcn;
};

// Named view over every parameter tensor, in the fixed traversal order used
// by the optimizer, the checkpoint payload, and the gradient checker:
// backbone[0].weight, backbone[0].bias, ..., semantic_head.weight,
// semantic_head.bias, embedding_head.weight, embedding_head.bias, then per
// GCN layer f_hidden.weight, f_hidden.bias, f_out.weight, f_out.bias,
// updator. Tensor payloads are in Eigen's column-major data order.
struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index size;
};

std::vector<TensorRef> tensor_refs(ModelParams& params);
Eigen::Index total_param_count(const ModelParams& params);
ModelParams zeros_like(const ModelParams& params);

// Everything backward needs from one GCN layer's forward pass.
struct GcnLayerTrace {
  Mat input;      // N x F, the layer's input embeddings
  Mat scores;     // N x k, raw attention scores p
  Mat weights;    // N x k, softmax(p); each row sums to 1
  Mat hidden;     // N x (k*H), post-ReLU scorer hidden, neighbor-major blocks
  Mat aggregate;  // N x F
};

struct ForwardTrace {
  Mat input_features;               // N x 6: centered xyz, rgb
  std::vector<Mat> activations;     // [input, post-ReLU per backbone layer]
  Mat logits;                       // N x C
  Mat initial_embeddings;           // N x F
  std::vector<GcnLayerTrace> gcn;
  Mat refined_embeddings;           // N x F
};

struct ModelOutput {
  Mat logits;
  Mat initial_embeddings;
  Mat refined_embeddings;
};

struct AttentionResult {
  Vec scores;   // k
  Vec weights;  // k, softmax of scores, sums to 1
};

// Per-point input features: xyz centered by the scene mean (scale kept in
// meters) concatenated with rgb.
Mat input_features(const Scene& scene);

// Seeded initialization: every tensor uniform in +-sqrt(1/fan_in), except the
// scorer output layer which starts at zero so attention begins as a uniform
// average. Tensors are filled in traversal order.
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

// Throws ConfigError when the parameter shapes do not match the config.
void check_shapes(const ModelParams& params, const ModelConfig& cfg);

struct BackboneResult {
  Mat features;            // N x D
  Mat logits;              // N x C
  Mat initial_embeddings;  // N x F
};

BackboneResult backbone_forward(const Scene& scene, const ModelParams& params,
                                ForwardTrace& trace);

AttentionResult attention_scores(const Eigen::Ref<const Vec>& center,
                                 const Eigen::Ref<const Mat>& neighbor_embeddings,
                                 const GcnLayerParams& layer);

Mat gcn_layer_forward(const Mat& embeddings, const KnnGraph& graph,
                      const GcnLayerParams& layer, GcnLayerTrace* trace = nullptr);

// Full forward pass: backbone, heads, then the GCN stack over the initial
// embeddings. Pure: identical inputs give bitwise-identical outputs.
ModelOutput model_forward(const Scene& scene, const KnnGraph& graph,
                          const ModelParams& params, ForwardTrace& trace);

// Exact analytic gradients for the scalar whose partials w.r.t. the three
// model outputs are grad_logits, grad_initial, grad_refined. grad_initial
// accumulates both its direct path and the path through the GCN stack.
// grad_inputs, when non-null, receives d/d input_features (N x 6).
ModelParams model_backward(const ForwardTrace& trace, const Mat& grad_logits,
                           const Mat& grad_initial, const Mat& grad_refined,
                           const KnnGraph& graph, const ModelParams& params,
                           Mat* grad_inputs = nullptr);

}  // namespace pcis
