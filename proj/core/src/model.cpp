#include "pcis/model.hpp"

#include "pcis/rng.hpp"

#include <cmath>
#include <sstream>

namespace pcis {
namespace {

void fill_uniform(Rng& rng, double bound, double* data, Eigen::Index size) {
  for (Eigen::Index i = 0; i < size; ++i) data[i] = rng.uniform(-bound, bound);
}

void init_dense(Rng& rng, DenseLayer& layer, int in, int out) {
  layer.weight.resize(in, out);
  layer.bias.resize(out);
  const double bound = std::sqrt(1.0 / in);
  fill_uniform(rng, bound, layer.weight.data(), layer.weight.size());
  fill_uniform(rng, bound, layer.bias.data(), layer.bias.size());
}

// Softmax with max subtraction; writes into out (same length as p).
void stable_softmax(const Eigen::RowVectorXd& p, Eigen::RowVectorXd& out) {
  const double m = p.maxCoeff();
  out = (p.array() - m).exp();
  out /= out.sum();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

Mat input_features(const Scene& scene) {
  const int n = scene.num_points();
  Mat feats(n, 6);
  const Eigen::RowVector3d center = scene.coords.colwise().mean();
  feats.leftCols(3) = scene.coords.rowwise() - center;
  feats.rightCols(3) = scene.colors;
  return feats;
}

std::vector<TensorRef> tensor_refs(ModelParams& params) {
  std::vector<TensorRef> refs;
  auto add = [&](const std::string& name, Mat& m) {
    refs.push_back({name, m.data(), m.size()});
  };
  auto add_vec = [&](const std::string& name, Vec& v) {
    refs.push_back({name, v.data(), v.size()});
  };
  for (std::size_t l = 0; l < params.backbone.size(); ++l) {
    const std::string base = "backbone" + std::to_string(l);
    add(base + ".weight", params.backbone[l].weight);
    add_vec(base + ".bias", params.backbone[l].bias);
  }
  add("semantic_head.weight", params.semantic_head.weight);
  add_vec("semantic_head.bias", params.semantic_head.bias);
  add("embedding_head.weight", params.embedding_head.weight);
  add_vec("embedding_head.bias", params.embedding_head.bias);
  for (std::size_t l = 0; l < params.gcn.size(); ++l) {
    const std::string base = "gcn" + std::to_string(l);
    add(base + ".f_hidden.weight", params.gcn[l].f_hidden.weight);
    add_vec(base + ".f_hidden.bias", params.gcn[l].f_hidden.bias);
    add(base + ".f_out.weight", params.gcn[l].f_out.weight);
    add_vec(base + ".f_out.bias", params.gcn[l].f_out.bias);
    add(base + ".updator", params.gcn[l].updator);
  }
  return refs;
}

Eigen::Index total_param_count(const ModelParams& params) {
  Eigen::Index n = 0;
  for (const auto& ref : tensor_refs(const_cast<ModelParams&>(params))) n += ref.size;
  return n;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams out = params;
  for (auto& ref : tensor_refs(out)) std::fill(ref.data, ref.data + ref.size, 0.0);
  return out;
}

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  Rng rng = Rng::for_stream(seed, 0);
  ModelParams params;

  int in = 6;
  for (int width : cfg.backbone_hidden) {
    DenseLayer layer;
    init_dense(rng, layer, in, width);
    params.backbone.push_back(std::move(layer));
    in = width;
  }
  init_dense(rng, params.semantic_head, in, cfg.num_classes);
  init_dense(rng, params.embedding_head, in, cfg.embed_dim);

  const int f = cfg.embed_dim;
  const int h = cfg.attention_hidden;
  for (int l = 0; l < cfg.gcn_layers; ++l) {
    GcnLayerParams layer;
    init_dense(rng, layer.f_hidden, 2 * f, h);
    // Zero scorer output: attention starts as the uniform neighbor average.
    layer.f_out.weight = Mat::Zero(h, 1);
    layer.f_out.bias = Vec::Zero(1);
    layer.updator.resize(2 * f, f);
    fill_uniform(rng, std::sqrt(1.0 / (2 * f)), layer.updator.data(), layer.updator.size());
    params.gcn.push_back(std::move(layer));
  }
  return params;
}

void check_shapes(const ModelParams& params, const ModelConfig& cfg) {
  std::ostringstream os;
  auto fail = [&](const std::string& what) {
    throw ConfigError("parameter/config shape mismatch: " + what);
  };

  if (params.backbone.size() != cfg.backbone_hidden.size()) fail("backbone layer count");
  int in = 6;
  for (std::size_t l = 0; l < params.backbone.size(); ++l) {
    const auto& layer = params.backbone[l];
    if (layer.weight.rows() != in || layer.weight.cols() != cfg.backbone_hidden[l] ||
        layer.bias.size() != cfg.backbone_hidden[l])
      fail("backbone layer " + std::to_string(l));
    in = cfg.backbone_hidden[l];
  }
  if (params.semantic_head.weight.rows() != in ||
      params.semantic_head.weight.cols() != cfg.num_classes ||
      params.semantic_head.bias.size() != cfg.num_classes)
    fail("semantic head");
  if (params.embedding_head.weight.rows() != in ||
      params.embedding_head.weight.cols() != cfg.embed_dim ||
      params.embedding_head.bias.size() != cfg.embed_dim)
    fail("embedding head");
  if (static_cast<int>(params.gcn.size()) != cfg.gcn_layers) fail("gcn layer count");
  const int f = cfg.embed_dim;
  const int h = cfg.attention_hidden;
  for (std::size_t l = 0; l < params.gcn.size(); ++l) {
    const auto& layer = params.gcn[l];
    if (layer.f_hidden.weight.rows() != 2 * f || layer.f_hidden.weight.cols() != h ||
        layer.f_hidden.bias.size() != h || layer.f_out.weight.rows() != h ||
        layer.f_out.weight.cols() != 1 || layer.f_out.bias.size() != 1 ||
        layer.updator.rows() != 2 * f || layer.updator.cols() != f)
      fail("gcn layer " + std::to_string(l));
  }
}

BackboneResult backbone_forward(const Scene& scene, const ModelParams& params,
                                ForwardTrace& trace) {
  trace.input_features = input_features(scene);
  trace.activations.clear();
  trace.activations.push_back(trace.input_features);

  for (const auto& layer : params.backbone) {
    if (trace.activations.back().cols() != layer.weight.rows())
      throw ConfigError("backbone_forward: layer input width mismatch");
    Mat z = (trace.activations.back() * layer.weight).rowwise() + layer.bias.transpose();
    trace.activations.push_back(z.cwiseMax(0.0));
  }

  const Mat& features = trace.activations.back();
  if (features.cols() != params.semantic_head.weight.rows() ||
      features.cols() != params.embedding_head.weight.rows())
    throw ConfigError("backbone_forward: head input width mismatch");

  trace.logits = (features * params.semantic_head.weight).rowwise() +
                 params.semantic_head.bias.transpose();
  trace.initial_embeddings = (features * params.embedding_head.weight).rowwise() +
                             params.embedding_head.bias.transpose();
  return {features, trace.logits, trace.initial_embeddings};
}

AttentionResult attention_scores(const Eigen::Ref<const Vec>& center,
                                 const Eigen::Ref<const Mat>& neighbor_embeddings,
                                 const GcnLayerParams& layer) {
  const int k = static_cast<int>(neighbor_embeddings.rows());
  const int f = static_cast<int>(center.size());
  Mat concat(k, 2 * f);
  concat.leftCols(f) = center.transpose().replicate(k, 1);
  concat.rightCols(f) = neighbor_embeddings;

  const Mat hidden =
      ((concat * layer.f_hidden.weight).rowwise() + layer.f_hidden.bias.transpose())
          .cwiseMax(0.0);
  Eigen::RowVectorXd p =
      (hidden * layer.f_out.weight).transpose().row(0).array() + layer.f_out.bias[0];

  Eigen::RowVectorXd alpha(k);
  stable_softmax(p, alpha);
  return {p.transpose(), alpha.transpose()};
}

Mat gcn_layer_forward(const Mat& embeddings, const KnnGraph& graph,
                      const GcnLayerParams& layer, GcnLayerTrace* trace) {
  const int n = static_cast<int>(embeddings.rows());
  const int f = static_cast<int>(embeddings.cols());
  const int k = graph.k;
  const int h = static_cast<int>(layer.f_hidden.bias.size());
  if (graph.num_points() != n)
    throw ConfigError("gcn_layer_forward: graph built over a different point count");
  if (layer.f_hidden.weight.rows() != 2 * f || layer.updator.rows() != 2 * f ||
      layer.updator.cols() != f)
    throw ConfigError("gcn_layer_forward: layer shapes do not match embedding dim");

  if (trace) {
    trace->input = embeddings;
    trace->scores.resize(n, k);
    trace->weights.resize(n, k);
    trace->hidden.resize(n, k * h);
    trace->aggregate.resize(n, f);
  }

  Mat out(n, f);
  Mat concat(k, 2 * f), hidden(k, h);
  Eigen::RowVectorXd p(k), alpha(k), aggregate(f), update_in(2 * f);

  for (int i = 0; i < n; ++i) {
    concat.leftCols(f) = embeddings.row(i).replicate(k, 1);
    for (int m = 0; m < k; ++m)
      concat.row(m).tail(f) = embeddings.row(graph.neighbors(i, m));

    hidden.noalias() = concat * layer.f_hidden.weight;
    hidden.rowwise() += layer.f_hidden.bias.transpose();
    hidden = hidden.cwiseMax(0.0);
    p.noalias() = (hidden * layer.f_out.weight).transpose();
    p.array() += layer.f_out.bias[0];
    stable_softmax(p, alpha);

    aggregate.setZero();
    for (int m = 0; m < k; ++m) aggregate += alpha[m] * concat.row(m).tail(f);

    update_in << embeddings.row(i), aggregate;
    out.row(i).noalias() = update_in * layer.updator;

    if (trace) {
      trace->scores.row(i) = p;
      trace->weights.row(i) = alpha;
      for (int m = 0; m < k; ++m) trace->hidden.row(i).segment(m * h, h) = hidden.row(m);
      trace->aggregate.row(i) = aggregate;
    }
  }
  return out;
}

ModelOutput model_forward(const Scene& scene, const KnnGraph& graph,
                          const ModelParams& params, ForwardTrace& trace) {
  if (graph.num_points() != scene.num_points())
    throw ConfigError("model_forward: graph/scene point count mismatch");

  backbone_forward(scene, params, trace);
  trace.gcn.clear();
  trace.gcn.resize(params.gcn.size());

  Mat embeddings = trace.initial_embeddings;
  for (std::size_t l = 0; l < params.gcn.size(); ++l)
    embeddings = gcn_layer_forward(embeddings, graph, params.gcn[l], &trace.gcn[l]);
  trace.refined_embeddings = embeddings;

  return {trace.logits, trace.initial_embeddings, trace.refined_embeddings};
}

namespace {

// Backward through one GCN layer. d_out is the gradient w.r.t. the layer
// output; returns the gradient w.r.t. the layer input and accumulates
// parameter gradients into grad.
Mat gcn_layer_backward(const GcnLayerTrace& t, const KnnGraph& graph,
                       const GcnLayerParams& layer, const Mat& d_out,
                       GcnLayerParams& grad) {
  const int n = static_cast<int>(t.input.rows());
  const int f = static_cast<int>(t.input.cols());
  const int k = graph.k;
  const int h = static_cast<int>(layer.f_hidden.bias.size());

  Mat d_in = Mat::Zero(n, f);
  Eigen::RowVectorXd update_in(2 * f), d_update_in(2 * f), d_agg(f);
  Eigen::RowVectorXd concat_m(2 * f), dh(h), dc(2 * f);
  Vec d_alpha(k);

  for (int i = 0; i < n; ++i) {
    // updator: out = [x_i, aggregate] * W
    update_in << t.input.row(i), t.aggregate.row(i);
    grad.updator.noalias() += update_in.transpose() * d_out.row(i);
    d_update_in.noalias() = d_out.row(i) * layer.updator.transpose();
    d_in.row(i) += d_update_in.head(f);
    d_agg = d_update_in.tail(f);

    // aggregate = sum_m alpha_m * x_{j_m}
    for (int m = 0; m < k; ++m) {
      const int j = graph.neighbors(i, m);
      d_alpha[m] = d_agg.dot(t.input.row(j));
      d_in.row(j) += t.weights(i, m) * d_agg;
    }

    // softmax
    const double s = t.weights.row(i).dot(d_alpha.transpose());
    for (int m = 0; m < k; ++m) {
      const double dp = t.weights(i, m) * (d_alpha[m] - s);
      if (dp == 0.0) continue;
      const int j = graph.neighbors(i, m);
      const auto hid = t.hidden.row(i).segment(m * h, h);

      // scorer: p = relu([x_i, x_j] W1 + b1) w2 + b2
      grad.f_out.weight.noalias() += dp * hid.transpose();
      grad.f_out.bias[0] += dp;
      dh = dp * layer.f_out.weight.transpose();
      for (int u = 0; u < h; ++u)
        if (hid[u] <= 0.0) dh[u] = 0.0;

      concat_m << t.input.row(i), t.input.row(j);
      grad.f_hidden.weight.noalias() += concat_m.transpose() * dh;
      grad.f_hidden.bias += dh.transpose();
      dc.noalias() = dh * layer.f_hidden.weight.transpose();
      d_in.row(i) += dc.head(f);
      d_in.row(j) += dc.tail(f);
    }
  }
  return d_in;
}

}  // namespace

ModelParams model_backward(const ForwardTrace& trace, const Mat& grad_logits,
                           const Mat& grad_initial, const Mat& grad_refined,
                           const KnnGraph& graph, const ModelParams& params,
                           Mat* grad_inputs) {
  if (trace.activations.size() != params.backbone.size() + 1 ||
      trace.gcn.size() != params.gcn.size())
    throw std::logic_error("model_backward: trace does not match params");
  const Eigen::Index n = trace.input_features.rows();
  if (grad_logits.rows() != n || grad_initial.rows() != n || grad_refined.rows() != n)
    throw std::logic_error("model_backward: gradient row count mismatch");

  ModelParams grads = zeros_like(params);

  // GCN stack, last layer first.
  Mat d_embeddings = grad_refined;
  for (int l = static_cast<int>(params.gcn.size()) - 1; l >= 0; --l)
    d_embeddings =
        gcn_layer_backward(trace.gcn[l], graph, params.gcn[l], d_embeddings, grads.gcn[l]);
  d_embeddings += grad_initial;

  // Heads.
  const Mat& features = trace.activations.back();
  grads.semantic_head.weight.noalias() = features.transpose() * grad_logits;
  grads.semantic_head.bias = grad_logits.colwise().sum().transpose();
  grads.embedding_head.weight.noalias() = features.transpose() * d_embeddings;
  grads.embedding_head.bias = d_embeddings.colwise().sum().transpose();

  Mat d_act = grad_logits * params.semantic_head.weight.transpose() +
              d_embeddings * params.embedding_head.weight.transpose();

  // Backbone, last layer first. activations[l+1] = relu(activations[l] W + b).
  for (int l = static_cast<int>(params.backbone.size()) - 1; l >= 0; --l) {
    const Mat& act = trace.activations[l + 1];
    Mat d_z = (act.array() > 0.0).select(d_act, 0.0);
    grads.backbone[l].weight.noalias() = trace.activations[l].transpose() * d_z;
    grads.backbone[l].bias = d_z.colwise().sum().transpose();
    d_act = d_z * params.backbone[l].weight.transpose();
  }
  if (grad_inputs) *grad_inputs = d_act;
  return grads;
}

}  // namespace pcis
