#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "dsm/error.hpp"
#include "dsm/random.hpp"
#include "dsm/rgcn.hpp"
#include "generators.hpp"
#include "oracles.hpp"

namespace dsm {
namespace {

Tensor from_rows(std::vector<std::vector<double>> rows) {
  Tensor t(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < t.rows(); ++r) {
    for (int c = 0; c < t.cols(); ++c) t(r, c) = rows[r][c];
  }
  return t;
}

// Two nodes, one message relation carrying j=1 -> i=0.
RgcnGraph two_node_graph(double rho) {
  RgcnGraph g;
  g.num_nodes = 2;
  g.num_relations = 1;
  g.num_message_relations = 1;
  g.class_relations = {0};
  g.messages = {{1, 0, 0, rho, 1.0}};
  g.node_rho = {rho, rho};
  return g;
}

LayerParams identity_layer(int d, int relations) {
  return {Tensor::identity(d), std::vector<Tensor>(relations, Tensor::identity(d))};
}

TEST(LayerForward, SingleNodeIdentity) {
  RgcnGraph g;
  g.num_nodes = 1;
  Tensor h = from_rows({{0.5, -2.0, 3.0}});
  Tensor out = layer_forward(h, g, identity_layer(3, 0), {},
                             Activation::kIdentity);
  EXPECT_EQ(out, h);
}

TEST(LayerForward, BaselineAddsNeighbour) {
  Tensor h = from_rows({{1.0, 2.0}, {10.0, 20.0}});
  Tensor out = layer_forward(h, two_node_graph(1.0), identity_layer(2, 1), {},
                             Activation::kIdentity);
  EXPECT_EQ(out, from_rows({{11.0, 22.0}, {10.0, 20.0}}));
}

TEST(LayerForward, EdgeWeightsDoubleNeighbour) {
  Tensor h = from_rows({{1.0, 2.0}, {10.0, 20.0}});
  Tensor out = layer_forward(h, two_node_graph(1.0), identity_layer(2, 1),
                             {Variant::kDsmEdgeWeights, 0.0, false},
                             Activation::kIdentity);
  EXPECT_EQ(out, from_rows({{21.0, 42.0}, {10.0, 20.0}}));
}

TEST(LayerForward, NodeBiasAddsTanh) {
  Tensor h = from_rows({{1.0, 2.0}, {10.0, 20.0}});
  RgcnGraph g = two_node_graph(0.5);
  Tensor out = layer_forward(h, g, identity_layer(2, 1),
                             {Variant::kDsmEdgeWeights, 0.0, true},
                             Activation::kIdentity);
  EXPECT_DOUBLE_EQ(out(0, 0), 1.0 + 1.5 * 10.0 + std::tanh(0.5 * 1.0));
  EXPECT_DOUBLE_EQ(out(1, 1), 20.0 + std::tanh(0.5 * 20.0));
}

TEST(LayerForward, ReluAndShapeErrors) {
  Tensor h = from_rows({{-1.0, 2.0}, {0.0, -3.0}});
  Tensor out = layer_forward(h, two_node_graph(0.0), identity_layer(2, 1), {},
                             Activation::kRelu);
  EXPECT_EQ(out, from_rows({{0.0, 0.0}, {0.0, 0.0}}));
  try {
    layer_forward(h, two_node_graph(0.0), identity_layer(3, 1), {},
                  Activation::kRelu);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  EXPECT_THROW(layer_forward(h, two_node_graph(0.0), identity_layer(2, 2), {},
                             Activation::kRelu),
               Error);
}

TEST(ApplyDsmHidden, MeanRule) {
  TypedGraph tg = parse_triples("a\tr\tb\tt\tt\na\tr\tc\tt\tt\n");
  tg.add_node("d", "t");
  tg = add_self_loops(tg);
  tg.edges[0].dsm = DsmRecord{"a", "b", {}, 0.5};
  tg.edges[1].dsm = DsmRecord{"a", "c", {}, 1.5};
  RgcnGraph g = build_rgcn_graph(tg);
  EXPECT_EQ(g.node_rho, (std::vector<double>{1.0, 0.5, 1.5, 0.0}));
  Tensor h(4, 2, 1.0);
  Tensor out = apply_dsm_hidden(h, g);
  EXPECT_EQ(out(0, 0), 2.0);
  EXPECT_EQ(out(3, 1), 1.0);

  tg.edges[0].dsm->rho_agg = 0.0;
  tg.edges[1].dsm->rho_agg = 0.0;
  EXPECT_EQ(apply_dsm_hidden(h, build_rgcn_graph(tg)), h);
}

TEST(BuildRgcnGraph, TrainEdgesOnlyCarryMessages) {
  TypedGraph tg = parse_triples("a\tr\tb\tt\tt\nb\ts\tc\tt\tt\n");
  tg.edges[1].split = Split::kTest;
  tg.edges[0].dsm = DsmRecord{"a", "b", {}, 0.25};
  tg.edges[0].dsm_reverse = DsmRecord{"b", "a", {}, 0.75};
  RgcnGraph g = build_rgcn_graph(add_self_loops(tg));
  EXPECT_EQ(g.num_message_relations, 2 + 1 + 2);
  EXPECT_EQ(g.class_relations, (std::vector<int>{0, 1}));
  ASSERT_EQ(g.train.size(), 1u);
  ASSERT_EQ(g.test.size(), 1u);
  EXPECT_EQ(g.test[0].label, 1);
  // forward a->b, inverse b->a; node c has no train edge but no self-loop
  // either since the triple file gave it an edge.
  ASSERT_EQ(g.messages.size(), 2u);
  EXPECT_EQ(g.messages[0].rho, 0.25);
  EXPECT_EQ(g.messages[1].relation, 3);
  EXPECT_EQ(g.messages[1].rho, 0.75);
}

TEST(ScoreRelations, Examples) {
  std::vector<double> zero = {0.0, 0.0};
  Tensor diag = from_rows({{2.0, -1.0}, {0.5, 3.0}});
  EXPECT_EQ(score_relations(zero, zero, diag), (std::vector<double>{0.0, 0.0}));
  std::vector<double> ones = {1.0, 1.0};
  EXPECT_EQ(score_relations(ones, ones, diag)[0], 1.0);
  Tensor swapped = from_rows({{0.5, 3.0}, {2.0, -1.0}});
  std::vector<double> hs = {0.3, -2.0};
  std::vector<double> ho = {1.7, 0.4};
  auto a = score_relations(hs, ho, diag);
  auto b = score_relations(hs, ho, swapped);
  EXPECT_EQ(a[0], b[1]);
  EXPECT_EQ(a[1], b[0]);
  std::vector<double> three = {1.0, 2.0, 3.0};
  EXPECT_THROW(score_relations(three, three, diag), Error);
}

RgcnGraph chain_graph(int relations) {
  std::string tsv;
  for (int r = 0; r < relations; ++r) {
    tsv += "n" + std::to_string(r) + "\tr" + std::to_string(r) + "\tn" +
           std::to_string(r + 1) + "\tt\tt\n";
  }
  return build_rgcn_graph(add_self_loops(parse_triples(tsv)));
}

TEST(Loss, UniformLogitsGiveLogR) {
  for (int r : {2, 3, 5}) {
    RgcnGraph g = chain_graph(r);
    ModelParams p = init_params(g, TrainConfig{});
    for (double& v : p.diagonals.data()) v = 0.0;
    EXPECT_NEAR(loss(g, p).value, std::log(static_cast<double>(r)), 1e-15);
  }
}

TEST(Loss, ZeroLambdaMatchesBaselineBitwise) {
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    RgcnGraph g = build_rgcn_graph(testing::random_graph(rng, 8, 3));
    TrainConfig cfg;
    cfg.hidden_dim = 4;
    ModelParams base = init_params(g, cfg);
    ModelParams reg = base;
    reg.variant = {Variant::kDsmRegularization, 0.0, false};
    LossResult a = loss(g, base);
    LossResult b = loss(g, reg);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.gradient.layers, b.gradient.layers);
    EXPECT_EQ(a.gradient.diagonals, b.gradient.diagonals);
  }
}

TEST(Loss, RegularizerAddsRhoWeightedTerm) {
  RgcnGraph g = chain_graph(2);
  for (auto& p : g.train) p.rho = 1.0;
  ModelParams p = init_params(g, TrainConfig{});
  for (double& v : p.diagonals.data()) v = 0.0;
  p.variant = {Variant::kDsmRegularization, 0.5, false};
  // p_true = 1/2 for both pairs.
  EXPECT_NEAR(loss(g, p).value, std::log(2.0) + 0.5 * 0.5, 1e-15);
}

TEST(Loss, GradientsMatchFiniteDifferences) {
  Rng rng(17);
  const std::vector<VariantConfig> variants = {
      {Variant::kBaseline, 0.0, false},
      {Variant::kDsmRegularization, 0.7, false},
      {Variant::kDsmHiddenLayer, 0.0, false},
      {Variant::kDsmEdgeWeights, 0.0, true},
  };
  for (const VariantConfig& v : variants) {
    for (int i = 0; i < 3; ++i) {
      TypedGraph tg = testing::random_graph(rng, 6, 3);
      RgcnGraph g = build_rgcn_graph(tg);
      TrainConfig cfg;
      cfg.hidden_dim = 4;
      cfg.seed = rng.below(1000);
      cfg.variant = v;
      ModelParams p = init_params(g, cfg);
      ModelParams numeric = testing::numeric_gradient(g, p, 1e-5);
      EXPECT_LT(testing::max_relative_error(loss(g, p).gradient, numeric, 1e-6),
                1e-4)
          << variant_name(v.variant) << " graph " << i;
    }
  }
}

TEST(Embed, PermutationInvariantOverEdgeOrder) {
  Rng rng(9);
  TypedGraph tg = testing::random_graph(rng, 10, 3);
  TypedGraph shuffled = tg;
  rng.shuffle(shuffled.edges);
  TrainConfig cfg;
  cfg.hidden_dim = 4;
  cfg.variant = {Variant::kDsmEdgeWeights, 0.0, true};
  RgcnGraph a = build_rgcn_graph(tg);
  RgcnGraph b = build_rgcn_graph(shuffled);
  ModelParams p = init_params(a, cfg);
  EXPECT_EQ(embed(p, a), embed(p, b));
}

TEST(Train, ZeroDsmVariantsMatchBaseline) {
  Rng rng(21);
  RgcnGraph g = build_rgcn_graph(testing::random_graph(rng, 10, 3, true));
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.hidden_dim = 4;
  auto base = train(g, cfg).history;
  for (Variant v : {Variant::kDsmEdgeWeights, Variant::kDsmHiddenLayer}) {
    cfg.variant = {v, 0.0, true};
    EXPECT_EQ(train(g, cfg).history, base);
  }
}

TEST(Train, ToyGraphReachesPerfectTrainAccuracy) {
  // Two relation classes determined by the object's type.
  std::string tsv;
  for (int i = 0; i < 6; ++i) {
    tsv += "p" + std::to_string(i) + "\tworks_at\to" + std::to_string(i % 2) +
           "\tperson\torg\n";
    tsv += "p" + std::to_string(i) + "\tlives_in\tc" + std::to_string(i % 3) +
           "\tperson\tcity\n";
  }
  TypedGraph tg = add_self_loops(parse_triples(tsv));
  RgcnGraph g = build_rgcn_graph(tg);
  TrainConfig cfg;
  cfg.epochs = 200;
  TrainResult r = train(g, cfg);
  EXPECT_EQ(r.history.back().train_acc, 1.0);
  EXPECT_EQ(accuracy(r.params, g, g.train), 1.0);

  std::vector<std::pair<std::string, std::string>> pairs = {{"p0", "o0"},
                                                            {"p1", "c1"}};
  EXPECT_EQ(predict(r.params, tg, pairs),
            (std::vector<int>{tg.find_relation("works_at"),
                              tg.find_relation("lives_in")}));

  std::vector<std::pair<std::string, std::string>> bad = {{"p0", "ghost"}};
  try {
    predict(r.params, tg, bad);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownNode);
  }
}

TEST(Train, SeedRepeatAndSingleEpoch) {
  Rng rng(4);
  RgcnGraph g = build_rgcn_graph(testing::random_graph(rng, 10, 3));
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.hidden_dim = 4;
  TrainResult a = train(g, cfg);
  TrainResult b = train(g, cfg);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.params, b.params);
  cfg.epochs = 1;
  TrainResult one = train(g, cfg);
  EXPECT_EQ(one.history.size(), 1u);
  EXPECT_EQ(one.best_epoch, 1);
  EXPECT_EQ(one.params, init_params(g, cfg));
}

TEST(Train, Errors) {
  RgcnGraph empty;
  empty.num_nodes = 1;
  try {
    train(empty, TrainConfig{});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateSplit);
  }
  RgcnGraph g = chain_graph(2);
  TrainConfig bad;
  bad.learning_rate = 1e300;
  bad.epochs = 50;
  try {
    train(g, bad);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteLoss);
  }
  bad.learning_rate = 0.1;
  bad.epochs = 0;
  EXPECT_THROW(train(g, bad), Error);
}

TEST(Predict, ZeroEmbeddingsTieToFirstRelation) {
  RgcnGraph g = chain_graph(3);
  ModelParams p = init_params(g, TrainConfig{});
  for (double& v : p.diagonals.data()) v = 0.0;
  auto pred = predict_pairs(p, g, g.train);
  for (int r : pred) EXPECT_EQ(r, 0);
}

TEST(Accuracy, MeanOfPerPairCorrectness) {
  Rng rng(8);
  RgcnGraph g = build_rgcn_graph(testing::random_graph(rng, 10, 3));
  TrainConfig cfg;
  cfg.hidden_dim = 4;
  ModelParams p = init_params(g, cfg);
  auto pred = predict_pairs(p, g, g.train);
  double hits = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    hits += pred[i] == g.class_relations[g.train[i].label];
  }
  EXPECT_DOUBLE_EQ(accuracy(p, g, g.train), hits / pred.size());
  EXPECT_EQ(accuracy(p, g, {}), 0.0);
}

TEST(HistoryCsv, Format) {
  std::vector<EpochStats> h = {{1, 0.5, 0.25, 1.0}};
  EXPECT_EQ(history_csv(h).substr(0, 30), "epoch,loss,train_acc,val_acc\n1");
}

}  // namespace
}  // namespace dsm
