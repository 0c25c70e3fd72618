#pragma once

// Relational graph convolution with hand-written reverse-mode gradients.
//
// Layer update for node i (message relations m include inverse relations and
// the shared self-loop relation):
//
//   h_i' = act( h_i W0 + sum_m sum_{j in N_i^m} e_ji h_j W_m / |N_i^m| )
//          [+ tanh(rho_i h_i)   node bias, only when in/out widths agree]
//
// e_ji is 1 except for the edge-weight variant, where it is 1 + rho(j, i).
// Edges are scored with a per-relation diagonal bilinear form and a softmax
// over the original relation types.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsm/graphset.hpp"

namespace dsm {

class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols, double fill = 0.0);
  static Tensor identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return data_[index(r, c)]; }
  double operator()(int r, int c) const { return data_[index(r, c)]; }
  std::span<double> row(int r) { return {data_.data() + index(r, 0), size_t(cols_)}; }
  std::span<const double> row(int r) const {
    return {data_.data() + index(r, 0), size_t(cols_)};
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;
  bool operator==(const Tensor&) const = default;

 private:
  size_t index(int r, int c) const { return size_t(r) * size_t(cols_) + size_t(c); }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// a * b. Zero entries of `a` are skipped, so one-hot inputs cost O(nnz).
Tensor matmul(const Tensor& a, const Tensor& b);
// a^T * b, skipping zero entries of `a`.
Tensor matmul_tn(const Tensor& a, const Tensor& b);
// a * b^T.
Tensor matmul_nt(const Tensor& a, const Tensor& b);

enum class Variant {
  kBaseline,
  kDsmRegularization,
  kDsmHiddenLayer,
  kDsmEdgeWeights,
};

std::string_view variant_name(Variant v);
bool variant_from_name(std::string_view name, Variant* out);

struct VariantConfig {
  Variant variant = Variant::kBaseline;
  double lambda = 0.0;     // regularization strength, >= 0
  bool node_bias = false;  // additive tanh(rho_i h_i) term

  bool operator==(const VariantConfig&) const = default;
};

struct TrainConfig {
  int epochs = 300;
  double learning_rate = 0.5;
  int hidden_dim = 32;
  int num_layers = 2;
  uint64_t seed = 0;
  VariantConfig variant;

  bool operator==(const TrainConfig&) const = default;
};

struct LayerParams {
  Tensor self;                   // d_in x d_out
  std::vector<Tensor> relations;  // per message relation, d_in x d_out

  bool operator==(const LayerParams&) const = default;
};

struct ModelParams {
  VariantConfig variant;
  bool one_hot_features = true;
  Tensor features;  // used when one_hot_features is false
  std::vector<LayerParams> layers;
  Tensor diagonals;  // classes x d_final
  // class index -> relation id in the graph catalog
  std::vector<int> class_relations;

  bool operator==(const ModelParams&) const = default;
};

// Message-passing view of a split TypedGraph: train edges, their inverses
// and self-loops carry messages; non-self-loop edges become labeled pairs.
struct RgcnGraph {
  struct Message {
    int src = 0;
    int dst = 0;
    int relation = 0;  // message relation id
    double rho = 0.0;  // rho(src, dst)
    double norm = 1.0;  // 1 / |N_dst^relation|
  };
  struct Pair {
    int subject = 0;
    int object = 0;
    int label = 0;     // class index
    double rho = 0.0;  // rho(subject, object)
  };

  int num_nodes = 0;
  int num_relations = 0;          // graph catalog size
  int num_message_relations = 0;  // catalog + one inverse per class
  std::vector<int> class_relations;
  std::vector<Message> messages;
  // Mean rho over the train edges incident on each node (0 when none).
  std::vector<double> node_rho;
  std::vector<Pair> train;
  std::vector<Pair> val;
  std::vector<Pair> test;
};

RgcnGraph build_rgcn_graph(const TypedGraph& graph);

// Rows of `h` scaled by 1 + node_rho.
Tensor apply_dsm_hidden(const Tensor& h, const RgcnGraph& graph);

enum class Activation { kRelu, kIdentity };

// One layer. Throws Error{kShapeMismatch}.
Tensor layer_forward(const Tensor& h, const RgcnGraph& graph,
                     const LayerParams& layer, const VariantConfig& variant,
                     Activation activation);

// logits[c] = sum_d h_s[d] * diagonals(c, d) * h_o[d]. Throws
// Error{kShapeMismatch}.
std::vector<double> score_relations(std::span<const double> h_s,
                                    std::span<const double> h_o,
                                    const Tensor& diagonals);

// Xavier-uniform initialization for `graph`, one-hot node features.
ModelParams init_params(const RgcnGraph& graph, const TrainConfig& config);

// Final-layer node embeddings.
Tensor embed(const ModelParams& params, const RgcnGraph& graph);

struct LossResult {
  double value = 0.0;
  ModelParams gradient;  // same shapes as the parameters; features unused
};

// Mean cross-entropy over train pairs, plus, for the regularization variant,
// lambda * mean(rho * (1 - p_true)). Throws Error{kNonFiniteLoss}.
LossResult loss(const RgcnGraph& graph, const ModelParams& params);

// Calls fn(tensor) for every trainable tensor in a fixed order.
template <typename Params, typename Fn>
void for_each_trainable(Params& params, Fn&& fn) {
  for (auto& layer : params.layers) {
    fn(layer.self);
    for (auto& r : layer.relations) fn(r);
  }
  fn(params.diagonals);
}

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;

  bool operator==(const EpochStats&) const = default;
};

struct TrainResult {
  ModelParams params;  // best validation accuracy, earliest epoch on ties
  std::vector<EpochStats> history;
  int best_epoch = 0;
};

// Full-batch gradient descent. Throws Error{kDegenerateSplit} without train
// pairs and Error{kNonFiniteLoss} on divergence.
TrainResult train(const RgcnGraph& graph, const TrainConfig& config);

// Predicted relation ids (graph catalog) for node pairs. Ties resolve to the
// smallest relation id. Throws Error{kUnknownNode}.
std::vector<int> predict(const ModelParams& params, const TypedGraph& graph,
                         std::span<const std::pair<std::string, std::string>> pairs);
std::vector<int> predict_pairs(const ModelParams& params,
                               const RgcnGraph& graph,
                               std::span<const RgcnGraph::Pair> pairs);

// Micro accuracy; 0 for an empty set.
double accuracy(const ModelParams& params, const RgcnGraph& graph,
                std::span<const RgcnGraph::Pair> pairs);

std::string history_csv(std::span<const EpochStats> history);

}  // namespace dsm
