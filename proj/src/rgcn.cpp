#include "dsm/rgcn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "dsm/error.hpp"
#include "dsm/random.hpp"
#include "text_util.hpp"

namespace dsm {

// ---------------------------------------------------------------------------
// Tensor

Tensor::Tensor(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(size_t(rows) * size_t(cols), fill) {
  if (rows < 0 || cols < 0) {
    throw Error(ErrorCode::kShapeMismatch, "negative tensor dimension");
  }
}

Tensor Tensor::identity(int n) {
  Tensor t(n, n);
  for (int i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

namespace {

void check_shape(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kShapeMismatch, what);
}

// out.row(r) += scale * v
void axpy_row(std::span<double> out, double scale, std::span<const double> v) {
  for (size_t c = 0; c < out.size(); ++c) out[c] += scale * v[c];
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_shape(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Tensor out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double v = a(i, k);
      if (v != 0.0) axpy_row(dst, v, b.row(k));
    }
  }
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  check_shape(a.rows() == b.rows(), "matmul_tn: row counts differ");
  Tensor out(a.cols(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    auto src = b.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double v = a(i, k);
      if (v != 0.0) axpy_row(out.row(k), v, src);
    }
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check_shape(a.cols() == b.cols(), "matmul_nt: column counts differ");
  Tensor out(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    auto ar = a.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      auto br = b.row(j);
      double s = 0.0;
      for (int c = 0; c < a.cols(); ++c) s += ar[c] * br[c];
      out(i, j) = s;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Variants

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kBaseline: return "baseline";
    case Variant::kDsmRegularization: return "dsm_regularization";
    case Variant::kDsmHiddenLayer: return "dsm_hidden_layer";
    case Variant::kDsmEdgeWeights: return "dsm_edge_weights";
  }
  return "";
}

bool variant_from_name(std::string_view name, Variant* out) {
  for (Variant v : {Variant::kBaseline, Variant::kDsmRegularization,
                    Variant::kDsmHiddenLayer, Variant::kDsmEdgeWeights}) {
    if (variant_name(v) == name) {
      *out = v;
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Graph view

RgcnGraph build_rgcn_graph(const TypedGraph& graph) {
  RgcnGraph g;
  g.num_nodes = graph.num_nodes();
  g.num_relations = graph.num_relations();
  std::vector<int> class_of(graph.num_relations(), -1);
  for (int r = 0; r < graph.num_relations(); ++r) {
    if (r == graph.self_relation) continue;
    class_of[r] = static_cast<int>(g.class_relations.size());
    g.class_relations.push_back(r);
  }
  g.num_message_relations =
      g.num_relations + static_cast<int>(g.class_relations.size());

  std::vector<double> rho_sum(g.num_nodes, 0.0);
  std::vector<int> rho_count(g.num_nodes, 0);
  for (const Edge& e : graph.edges) {
    const bool self = e.relation == graph.self_relation;
    if (!self) {
      RgcnGraph::Pair p{e.subject, e.object, class_of[e.relation], e.rho()};
      switch (e.split) {
        case Split::kTrain: g.train.push_back(p); break;
        case Split::kVal: g.val.push_back(p); break;
        case Split::kTest: g.test.push_back(p); break;
      }
    }
    if (e.split != Split::kTrain) continue;
    if (self) {
      g.messages.push_back({e.subject, e.object, e.relation, 0.0, 1.0});
      continue;
    }
    g.messages.push_back({e.subject, e.object, e.relation, e.rho(), 1.0});
    g.messages.push_back({e.object, e.subject,
                          g.num_relations + class_of[e.relation],
                          e.rho_reverse(), 1.0});
    for (int v : {e.subject, e.object}) {
      rho_sum[v] += e.rho();
      ++rho_count[v];
    }
  }

  // Canonical order makes every sum independent of the input edge order.
  std::sort(g.messages.begin(), g.messages.end(),
            [](const RgcnGraph::Message& a, const RgcnGraph::Message& b) {
              return std::tie(a.relation, a.dst, a.src) <
                     std::tie(b.relation, b.dst, b.src);
            });
  std::map<std::pair<int, int>, int> degree;
  for (const auto& m : g.messages) ++degree[{m.relation, m.dst}];
  for (auto& m : g.messages) m.norm = 1.0 / degree[{m.relation, m.dst}];

  g.node_rho.assign(g.num_nodes, 0.0);
  for (int v = 0; v < g.num_nodes; ++v) {
    if (rho_count[v] > 0) g.node_rho[v] = rho_sum[v] / rho_count[v];
  }
  return g;
}

Tensor apply_dsm_hidden(const Tensor& h, const RgcnGraph& graph) {
  check_shape(h.rows() == graph.num_nodes, "hidden rows != node count");
  Tensor out = h;
  for (int i = 0; i < h.rows(); ++i) {
    const double s = 1.0 + graph.node_rho[i];
    for (double& v : out.row(i)) v *= s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

bool uses_edge_weights(const VariantConfig& v) {
  return v.variant == Variant::kDsmEdgeWeights;
}

bool uses_node_bias(const VariantConfig& v, const Tensor& h,
                    const LayerParams& layer) {
  return v.node_bias && uses_edge_weights(v) &&
         h.cols() == layer.self.cols();
}

double message_weight(const RgcnGraph::Message& m, bool edge_weights) {
  const double e = edge_weights ? 1.0 + m.rho : 1.0;
  return m.norm * e;
}

struct LayerCache {
  Tensor input;
  Tensor pre;
  Activation activation = Activation::kIdentity;
  bool bias = false;
  bool hidden_scale = false;
};

void check_layer(const Tensor& h, const RgcnGraph& graph,
                 const LayerParams& layer) {
  check_shape(h.rows() == graph.num_nodes, "layer input rows != node count");
  check_shape(h.cols() == layer.self.rows(), "layer input width != W0 rows");
  check_shape(static_cast<int>(layer.relations.size()) ==
                  graph.num_message_relations,
              "relation matrix count != message relation count");
  for (const Tensor& w : layer.relations) {
    check_shape(w.rows() == layer.self.rows() && w.cols() == layer.self.cols(),
                "relation matrix shape != W0 shape");
  }
}

Tensor pre_activation(const Tensor& h, const RgcnGraph& graph,
                      const LayerParams& layer, bool edge_weights) {
  Tensor pre = matmul(h, layer.self);
  size_t i = 0;
  while (i < graph.messages.size()) {
    const int rel = graph.messages[i].relation;
    const Tensor proj = matmul(h, layer.relations[rel]);
    for (; i < graph.messages.size() && graph.messages[i].relation == rel; ++i) {
      const auto& m = graph.messages[i];
      axpy_row(pre.row(m.dst), message_weight(m, edge_weights),
               proj.row(m.src));
    }
  }
  return pre;
}

Tensor activate(const Tensor& pre, Activation act) {
  Tensor out = pre;
  if (act == Activation::kRelu) {
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  }
  return out;
}

void add_node_bias(Tensor* out, const Tensor& h, const RgcnGraph& graph) {
  for (int i = 0; i < h.rows(); ++i) {
    auto dst = out->row(i);
    auto src = h.row(i);
    for (int c = 0; c < h.cols(); ++c) {
      dst[c] += std::tanh(graph.node_rho[i] * src[c]);
    }
  }
}

Tensor input_features(const ModelParams& params, const RgcnGraph& graph) {
  if (params.one_hot_features) return Tensor::identity(graph.num_nodes);
  return params.features;
}

Tensor forward(const ModelParams& params, const RgcnGraph& graph,
               std::vector<LayerCache>* caches) {
  Tensor h = input_features(params, graph);
  const auto& v = params.variant;
  const size_t n_layers = params.layers.size();
  for (size_t l = 0; l < n_layers; ++l) {
    const LayerParams& layer = params.layers[l];
    check_layer(h, graph, layer);
    LayerCache cache;
    cache.activation =
        l + 1 < n_layers ? Activation::kRelu : Activation::kIdentity;
    cache.bias = uses_node_bias(v, h, layer);
    cache.hidden_scale = l == 0 && v.variant == Variant::kDsmHiddenLayer;
    cache.pre = pre_activation(h, graph, layer, uses_edge_weights(v));
    Tensor out = activate(cache.pre, cache.activation);
    if (cache.bias) add_node_bias(&out, h, graph);
    if (cache.hidden_scale) out = apply_dsm_hidden(out, graph);
    cache.input = std::move(h);
    h = std::move(out);
    if (caches) caches->push_back(std::move(cache));
  }
  return h;
}

// Returns the gradient w.r.t. the layer input when `need_input_grad`.
Tensor layer_backward(const LayerCache& cache, const RgcnGraph& graph,
                      const LayerParams& layer, const VariantConfig& variant,
                      Tensor d_out, LayerParams* grad, bool need_input_grad) {
  const Tensor& h = cache.input;
  if (cache.hidden_scale) {
    for (int i = 0; i < d_out.rows(); ++i) {
      const double s = 1.0 + graph.node_rho[i];
      for (double& v : d_out.row(i)) v *= s;
    }
  }
  Tensor d_input;
  if (need_input_grad) d_input = Tensor(h.rows(), h.cols());
  if (cache.bias && need_input_grad) {
    for (int i = 0; i < h.rows(); ++i) {
      const double rho = graph.node_rho[i];
      for (int c = 0; c < h.cols(); ++c) {
        const double t = std::tanh(rho * h(i, c));
        d_input(i, c) += d_out(i, c) * (1.0 - t * t) * rho;
      }
    }
  }
  Tensor d_pre = std::move(d_out);
  if (cache.activation == Activation::kRelu) {
    for (size_t k = 0; k < d_pre.data().size(); ++k) {
      if (!(cache.pre.data()[k] > 0.0)) d_pre.data()[k] = 0.0;
    }
  }

  grad->self = matmul_tn(h, d_pre);
  if (need_input_grad) {
    Tensor t = matmul_nt(d_pre, layer.self);
    for (size_t k = 0; k < t.data().size(); ++k) d_input.data()[k] += t.data()[k];
  }

  const bool edge_weights = uses_edge_weights(variant);
  grad->relations.assign(layer.relations.size(),
                         Tensor(layer.self.rows(), layer.self.cols()));
  size_t i = 0;
  while (i < graph.messages.size()) {
    const int rel = graph.messages[i].relation;
    Tensor d_proj(h.rows(), layer.self.cols());
    for (; i < graph.messages.size() && graph.messages[i].relation == rel; ++i) {
      const auto& m = graph.messages[i];
      axpy_row(d_proj.row(m.src), message_weight(m, edge_weights),
               d_pre.row(m.dst));
    }
    grad->relations[rel] = matmul_tn(h, d_proj);
    if (need_input_grad) {
      Tensor t = matmul_nt(d_proj, layer.relations[rel]);
      for (size_t k = 0; k < t.data().size(); ++k) {
        d_input.data()[k] += t.data()[k];
      }
    }
  }
  return d_input;
}

// Stable log-sum-exp softmax; returns log Z and fills probabilities.
double softmax(std::span<const double> logits, std::vector<double>* probs) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  probs->resize(logits.size());
  for (size_t c = 0; c < logits.size(); ++c) {
    (*probs)[c] = std::exp(logits[c] - mx);
    sum += (*probs)[c];
  }
  for (double& p : *probs) p /= sum;
  return mx + std::log(sum);
}

size_t argmax(std::span<const double> v) {
  size_t best = 0;
  for (size_t c = 1; c < v.size(); ++c) {
    if (v[c] > v[best]) best = c;
  }
  return best;
}

LossResult loss_impl(const RgcnGraph& graph, const ModelParams& params,
                     Tensor* embeddings) {
  if (graph.train.empty()) {
    throw Error(ErrorCode::kDegenerateSplit, "no training pairs");
  }
  std::vector<LayerCache> caches;
  Tensor z = forward(params, graph, &caches);
  if (!z.all_finite()) {
    throw Error(ErrorCode::kNonFiniteLoss, "non-finite node embeddings");
  }
  const Tensor& diag = params.diagonals;
  check_shape(diag.cols() == z.cols(), "diagonal width != embedding width");
  check_shape(diag.rows() == static_cast<int>(graph.class_relations.size()),
              "diagonal rows != class count");

  const double n = static_cast<double>(graph.train.size());
  const bool reg = params.variant.variant == Variant::kDsmRegularization &&
                   params.variant.lambda > 0.0;
  const double lambda = params.variant.lambda;

  LossResult result;
  result.gradient.variant = params.variant;
  result.gradient.one_hot_features = params.one_hot_features;
  result.gradient.class_relations = params.class_relations;
  result.gradient.diagonals = Tensor(diag.rows(), diag.cols());
  Tensor dz(z.rows(), z.cols());

  double ce_sum = 0.0;
  double reg_sum = 0.0;
  std::vector<double> probs;
  std::vector<double> dlogit(diag.rows());
  for (const auto& p : graph.train) {
    auto hs = z.row(p.subject);
    auto ho = z.row(p.object);
    std::vector<double> logits = score_relations(hs, ho, diag);
    const double log_z = softmax(logits, &probs);
    ce_sum += log_z - logits[p.label];
    const double pt = probs[p.label];
    for (size_t c = 0; c < probs.size(); ++c) {
      dlogit[c] = (probs[c] - (int(c) == p.label ? 1.0 : 0.0)) / n;
    }
    if (reg) {
      reg_sum += p.rho * (1.0 - pt);
      const double scale = lambda * p.rho * pt / n;
      for (size_t c = 0; c < probs.size(); ++c) {
        dlogit[c] -= scale * ((int(c) == p.label ? 1.0 : 0.0) - probs[c]);
      }
    }
    auto dhs = dz.row(p.subject);
    auto dho = dz.row(p.object);
    for (int c = 0; c < diag.rows(); ++c) {
      const double g = dlogit[c];
      auto dc = diag.row(c);
      auto gd = result.gradient.diagonals.row(c);
      for (int d = 0; d < diag.cols(); ++d) {
        gd[d] += g * hs[d] * ho[d];
        dhs[d] += g * dc[d] * ho[d];
        dho[d] += g * dc[d] * hs[d];
      }
    }
  }
  result.value = ce_sum / n;
  if (reg) result.value += lambda * reg_sum / n;
  if (!std::isfinite(result.value)) {
    throw Error(ErrorCode::kNonFiniteLoss, "loss is not finite");
  }

  result.gradient.layers.resize(params.layers.size());
  Tensor d = std::move(dz);
  for (size_t l = params.layers.size(); l-- > 0;) {
    d = layer_backward(caches[l], graph, params.layers[l], params.variant,
                       std::move(d), &result.gradient.layers[l], l > 0);
  }
  if (embeddings) *embeddings = std::move(z);
  return result;
}

double accuracy_from(const Tensor& z, const Tensor& diag,
                     std::span<const RgcnGraph::Pair> pairs) {
  if (pairs.empty()) return 0.0;
  int64_t correct = 0;
  for (const auto& p : pairs) {
    auto logits = score_relations(z.row(p.subject), z.row(p.object), diag);
    if (static_cast<int>(argmax(logits)) == p.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

Tensor xavier(int fan_in, int fan_out, Rng* rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  Tensor t(fan_in, fan_out);
  for (double& v : t.data()) v = rng->uniform(-limit, limit);
  return t;
}

}  // namespace

Tensor layer_forward(const Tensor& h, const RgcnGraph& graph,
                     const LayerParams& layer, const VariantConfig& variant,
                     Activation activation) {
  check_layer(h, graph, layer);
  Tensor out = activate(
      pre_activation(h, graph, layer, uses_edge_weights(variant)), activation);
  if (uses_node_bias(variant, h, layer)) add_node_bias(&out, h, graph);
  return out;
}

std::vector<double> score_relations(std::span<const double> h_s,
                                    std::span<const double> h_o,
                                    const Tensor& diagonals) {
  check_shape(h_s.size() == h_o.size() &&
                  static_cast<int>(h_s.size()) == diagonals.cols(),
              "score_relations: embedding widths differ");
  std::vector<double> logits(diagonals.rows(), 0.0);
  for (int c = 0; c < diagonals.rows(); ++c) {
    auto dc = diagonals.row(c);
    double s = 0.0;
    for (size_t d = 0; d < h_s.size(); ++d) s += h_s[d] * dc[d] * h_o[d];
    logits[c] = s;
  }
  return logits;
}

ModelParams init_params(const RgcnGraph& graph, const TrainConfig& config) {
  if (config.hidden_dim < 1 || config.num_layers < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "hidden_dim and num_layers must be >= 1");
  }
  Rng rng(config.seed);
  ModelParams p;
  p.variant = config.variant;
  p.one_hot_features = true;
  p.class_relations = graph.class_relations;
  int d_in = graph.num_nodes;
  for (int l = 0; l < config.num_layers; ++l) {
    LayerParams layer;
    layer.self = xavier(d_in, config.hidden_dim, &rng);
    for (int m = 0; m < graph.num_message_relations; ++m) {
      layer.relations.push_back(xavier(d_in, config.hidden_dim, &rng));
    }
    p.layers.push_back(std::move(layer));
    d_in = config.hidden_dim;
  }
  const int classes = static_cast<int>(graph.class_relations.size());
  p.diagonals = xavier(classes, config.hidden_dim, &rng);
  return p;
}

Tensor embed(const ModelParams& params, const RgcnGraph& graph) {
  return forward(params, graph, nullptr);
}

LossResult loss(const RgcnGraph& graph, const ModelParams& params) {
  return loss_impl(graph, params, nullptr);
}

TrainResult train(const RgcnGraph& graph, const TrainConfig& config) {
  if (config.epochs < 1 || !(config.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "epochs must be >= 1 and learning_rate > 0");
  }
  if (config.variant.lambda < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  }
  if (graph.train.empty()) {
    throw Error(ErrorCode::kDegenerateSplit, "no training pairs");
  }
  TrainResult result;
  ModelParams params = init_params(graph, config);
  double best_val = -1.0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Tensor z;
    LossResult lr = loss_impl(graph, params, &z);
    EpochStats st{epoch, lr.value,
                  accuracy_from(z, params.diagonals, graph.train),
                  accuracy_from(z, params.diagonals, graph.val)};
    result.history.push_back(st);
    const double selection = graph.val.empty() ? st.train_acc : st.val_acc;
    if (selection > best_val) {
      best_val = selection;
      result.params = params;
      result.best_epoch = epoch;
    }
    std::vector<Tensor*> targets;
    for_each_trainable(params, [&](Tensor& t) { targets.push_back(&t); });
    size_t idx = 0;
    for_each_trainable(lr.gradient, [&](Tensor& g) {
      auto& dst = targets[idx++]->data();
      for (size_t k = 0; k < dst.size(); ++k) {
        dst[k] -= config.learning_rate * g.data()[k];
      }
    });
  }
  return result;
}

std::vector<int> predict_pairs(const ModelParams& params,
                               const RgcnGraph& graph,
                               std::span<const RgcnGraph::Pair> pairs) {
  Tensor z = embed(params, graph);
  std::vector<int> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.subject < 0 || p.subject >= graph.num_nodes || p.object < 0 ||
        p.object >= graph.num_nodes) {
      throw Error(ErrorCode::kUnknownNode, "pair references unknown node");
    }
    auto logits = score_relations(z.row(p.subject), z.row(p.object),
                                  params.diagonals);
    out.push_back(params.class_relations[argmax(logits)]);
  }
  return out;
}

std::vector<int> predict(
    const ModelParams& params, const TypedGraph& graph,
    std::span<const std::pair<std::string, std::string>> pairs) {
  RgcnGraph g = build_rgcn_graph(graph);
  std::vector<RgcnGraph::Pair> resolved;
  for (const auto& [s, o] : pairs) {
    const int si = graph.find_node(s);
    const int oi = graph.find_node(o);
    if (si < 0) throw Error(ErrorCode::kUnknownNode, "unknown node " + s);
    if (oi < 0) throw Error(ErrorCode::kUnknownNode, "unknown node " + o);
    resolved.push_back({si, oi, 0, 0.0});
  }
  return predict_pairs(params, g, resolved);
}

double accuracy(const ModelParams& params, const RgcnGraph& graph,
                std::span<const RgcnGraph::Pair> pairs) {
  if (pairs.empty()) return 0.0;
  Tensor z = embed(params, graph);
  return accuracy_from(z, params.diagonals, pairs);
}

std::string history_csv(std::span<const EpochStats> history) {
  std::string out = "epoch,loss,train_acc,val_acc\n";
  for (const EpochStats& e : history) {
    out += std::to_string(e.epoch) + "," + format_double(e.loss) + "," +
           format_double(e.train_acc) + "," + format_double(e.val_acc) + "\n";
  }
  return out;
}

}  // namespace dsm
