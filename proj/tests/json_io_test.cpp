#include <gtest/gtest.h>

#include "dsm/error.hpp"
#include "dsm/json_io.hpp"
#include "dsm/random.hpp"
#include "generators.hpp"

namespace dsm {
namespace {

template <typename T, typename F>
void expect_round_trip(const T& value, F decode) {
  Json j = to_json(value);
  T back = decode(parse_json(dump_json(j)));
  EXPECT_EQ(back, value);
  EXPECT_EQ(dump_json(to_json(back)), dump_json(j));
}

TEST(JsonIo, CorpusArtifactsRoundTrip) {
  Rng rng(11);
  testing::Vocabulary vocab = testing::make_vocabulary(12);
  testing::RandomCorpus corpus = testing::random_corpus(rng, vocab, 8);
  for (const Document& d : corpus.docs) expect_round_trip(d, document_from_json);
  for (const Mention& m : corpus.mentions) {
    expect_round_trip(m, mention_from_json);
  }
  FeatureCatalog catalog = FeatureCatalog::standard(true, 0.3);
  expect_round_trip(catalog, catalog_from_json);
  CorpusIndex index = build_index(corpus.docs, corpus.mentions, catalog);
  expect_round_trip(index, index_from_json);
  expect_round_trip(rho_aggregate(index, catalog, "x0", "x1"),
                    dsm_record_from_json);
}

TEST(JsonIo, ModelArtifactsRoundTrip) {
  Rng rng(5);
  TypedGraph g = testing::random_graph(rng, 8, 3);
  expect_round_trip(g, graph_from_json);
  RgcnGraph rg = build_rgcn_graph(g);
  TrainConfig cfg;
  cfg.hidden_dim = 3;
  cfg.variant = {Variant::kDsmEdgeWeights, 0.0, true};
  expect_round_trip(cfg, [](const Json& j) {
    return train_config_from_json(j, TrainConfig{});
  });
  expect_round_trip(init_params(rg, cfg), params_from_json);
}

TEST(JsonIo, TrainConfigDefaultsFillGaps) {
  TrainConfig defaults;
  defaults.epochs = 17;
  TrainConfig c = train_config_from_json(parse_json(R"({"learning_rate": 0.1})"),
                                         defaults);
  EXPECT_EQ(c.epochs, 17);
  EXPECT_EQ(c.learning_rate, 0.1);
}

TEST(JsonIo, MalformedInputIsParseError) {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code([] { parse_json("{nope"); }), ErrorCode::kParseError);
  EXPECT_EQ(code([] { document_from_json(parse_json("[1, 2]")); }),
            ErrorCode::kParseError);
  EXPECT_EQ(code([] { mention_from_json(parse_json(R"({"entity": 3})")); }),
            ErrorCode::kParseError);
  EXPECT_EQ(code([] { parse_jsonl("{}\n{bad\n"); }), ErrorCode::kParseError);
  EXPECT_EQ(parse_jsonl("{}\n\n[]\n").size(), 2u);
}

}  // namespace
}  // namespace dsm
