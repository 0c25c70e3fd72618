#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsm/dsmcore.hpp"
#include "dsm/error.hpp"
#include "dsm/harness.hpp"

namespace dsm {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::path(::testing::TempDir()) / ("dsm_harness_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

SynthSpec small_spec(uint64_t seed = 1) {
  SynthSpec s;
  s.seed = seed;
  s.n_entities = 60;
  s.n_relation_types = 3;
  s.edges_per_relation = 12;
  return s;
}

struct Analysed {
  std::vector<Document> docs;
  std::vector<Mention> mentions;
  CorpusIndex index;
};

Analysed analyse(const SynthCorpus& corpus, const FeatureCatalog& catalog) {
  Analysed a;
  for (const auto& [id, markup] : corpus.documents) {
    a.docs.push_back(parse_document(markup, id));
  }
  a.docs = enrich_units(a.docs);
  a.mentions = annotate_corpus(a.docs, corpus.gazetteers);
  a.index = build_index(a.docs, a.mentions, catalog);
  return a;
}

TEST(Synth, FullyStructural) {
  SynthSpec s = small_spec();
  s.p_struct = 1.0;
  SynthCorpus c = synth_corpus(s);
  ASSERT_EQ(c.triples.size(), 36u);
  for (const SynthTriple& t : c.triples) {
    EXPECT_TRUE(t.structural);
    EXPECT_NE(t.feature, "body");
  }
}

TEST(Synth, NoStructureLeavesOnlyTitleEvidence) {
  SynthSpec s = small_spec();
  s.p_struct = 0.0;
  SynthCorpus c = synth_corpus(s);
  FeatureCatalog catalog = FeatureCatalog::standard(false);
  Analysed a = analyse(c, catalog);
  bool any_title = false;
  for (const SynthTriple& t : c.triples) {
    EXPECT_FALSE(t.structural);
    DsmRecord r = rho_aggregate(a.index, catalog, t.subject, t.object);
    for (int k = 1; k <= catalog.relational_count(); ++k) {
      if (catalog.relational(k).name == "title") {
        any_title = any_title || r.rho_k[k - 1] > 0.0;
      } else {
        EXPECT_EQ(r.rho_k[k - 1], 0.0) << catalog.relational(k).name;
      }
    }
  }
  EXPECT_TRUE(any_title);
}

TEST(Synth, SeedDeterminism) {
  SynthCorpus a = synth_corpus(small_spec(4));
  SynthCorpus b = synth_corpus(small_spec(4));
  SynthCorpus c = synth_corpus(small_spec(5));
  EXPECT_EQ(a.documents, b.documents);
  EXPECT_EQ(triples_tsv(a), triples_tsv(b));
  EXPECT_EQ(ledger_tsv(a), ledger_tsv(b));
  EXPECT_NE(a.documents, c.documents);
}

TEST(Synth, StatsMatchGenerationParameters) {
  SynthSpec s = small_spec();
  SynthCorpus c = synth_corpus(s);
  TypedGraph g = parse_triples(triples_tsv(c));
  DatasetStats st = stats(g, static_cast<int64_t>(c.documents.size()));
  EXPECT_EQ(st.relation_types, s.n_relation_types);
  EXPECT_EQ(g.edges.size(),
            static_cast<size_t>(s.n_relation_types * s.edges_per_relation));
  EXPECT_LE(st.nodes, s.n_entities);
  EXPECT_EQ(st.documents, s.n_entities * s.docs_per_entity);
  std::set<std::string> types;
  for (const Gazetteer& gz : c.gazetteers) types.insert(gz.entity_type());
  EXPECT_LE(st.node_types, static_cast<int64_t>(types.size()));
}

TEST(Synth, WriteLaysOutFiles) {
  fs::path dir = fresh_dir("write");
  SynthCorpus c = synth_corpus(small_spec());
  SynthPaths p = write_synth(c, dir.string());
  EXPECT_EQ(slurp(p.triples), triples_tsv(c));
  EXPECT_EQ(slurp(p.ledger), ledger_tsv(c));
  EXPECT_EQ(parse_corpus(p.corpus_dir).size(), c.documents.size());
  EXPECT_EQ(load_gazetteers(p.gazetteer).size(), c.gazetteers.size());
}

TEST(Synth, InvalidSpec) {
  SynthSpec s = small_spec();
  s.p_struct = 1.5;
  EXPECT_THROW(synth_corpus(s), Error);
  s = small_spec();
  s.n_relation_types = 0;
  EXPECT_THROW(synth_corpus(s), Error);
}

RgcnGraph labelled_test(std::vector<int> labels, int classes) {
  RgcnGraph g;
  g.num_nodes = 2;
  for (int c = 0; c < classes; ++c) g.class_relations.push_back(c);
  for (int l : labels) g.test.push_back({0, 1, l, 0.0});
  return g;
}

TEST(ReportClasswise, EmptyTestSplit) {
  RgcnGraph g = labelled_test({}, 2);
  EXPECT_EQ(report_classwise(g, {"a", "b"}, {"base"}, {{}}),
            "relation,support,base_acc\n");
}

TEST(ReportClasswise, SingleClass) {
  RgcnGraph g = labelled_test({1, 1, 1}, 2);
  EXPECT_EQ(report_classwise(g, {"a", "b"}, {"base"}, {{1, 0, 1}}),
            "relation,support,base_acc\nb,3,0.6666666666666666\n");
}

TEST(ReportClasswise, RecomposesMicroAccuracy) {
  RgcnGraph g = labelled_test({0, 1, 1, 2, 2, 2, 0}, 3);
  std::vector<std::vector<int>> preds = {{0, 1, 0, 2, 1, 2, 0},
                                         {1, 1, 1, 0, 0, 2, 2}};
  std::string csv = report_classwise(g, {"a", "b", "c"}, {"x", "y"}, preds);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  double sums[2] = {0, 0};
  int64_t total = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string name, support, a0, a1;
    std::getline(row, name, ',');
    std::getline(row, support, ',');
    std::getline(row, a0, ',');
    std::getline(row, a1, ',');
    total += std::stoll(support);
    sums[0] += std::stod(support) * std::stod(a0);
    sums[1] += std::stod(support) * std::stod(a1);
  }
  EXPECT_EQ(total, 7);
  EXPECT_NEAR(sums[0] / total, 5.0 / 7.0, 1e-12);
  EXPECT_NEAR(sums[1] / total, 3.0 / 7.0, 1e-12);
  EXPECT_THROW(report_classwise(g, {"a", "b", "c"}, {"x"}, preds), Error);
}

TEST(AccuracyTable, Shape) {
  EXPECT_EQ(accuracy_table("ds", {"a", "b"}, {0.5, 0.25}),
            "dataset,a,b\nds,0.5,0.25\n");
}

TEST(Config, DefaultsAndErrors) {
  PipelineConfig c = config_from_json(parse_json(R"({"synth": {"seed": 3}})"));
  EXPECT_TRUE(c.use_synth);
  EXPECT_EQ(c.synth.seed, 3u);
  EXPECT_EQ(c.variants.size(), 4u);
  EXPECT_EQ(variant_labels(c.variants),
            (std::vector<std::string>{"baseline", "dsm_regularization",
                                      "dsm_hidden_layer", "dsm_edge_weights"}));
  EXPECT_EQ(config_from_json(to_json(c)).variants, c.variants);

  auto code = [](const char* text) {
    try {
      config_from_json(parse_json(text));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code("[]"), ErrorCode::kParseError);
  EXPECT_EQ(code("{}"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code(R"({"synth": {}, "variants": []})"),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code(R"({"synth": {}, "split": {"fractions": [1]}})"),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code(R"({"synth": {"seed": "x"}})"), ErrorCode::kParseError);

  PipelineConfig missing;
  missing.corpus_dir = "/nonexistent/corpus";
  missing.gazetteer = "/nonexistent/g.tsv";
  missing.triples = "/nonexistent/t.tsv";
  EXPECT_THROW(validate_paths(missing), Error);
}

TEST(Config, OverrideSeed) {
  PipelineConfig c = config_from_json(parse_json(R"({"synth": {}})"));
  override_seed(&c, 99);
  EXPECT_EQ(c.synth.seed, 99u);
  EXPECT_EQ(c.split_seed, 99u);
  for (const TrainConfig& t : c.variants) EXPECT_EQ(t.seed, 99u);
}

PipelineConfig tiny_config(const fs::path& out) {
  PipelineConfig c;
  c.dataset = "tiny";
  c.use_synth = true;
  c.synth = small_spec();
  c.output_dir = out.string();
  TrainConfig t;
  t.epochs = 15;
  t.hidden_dim = 8;
  c.variants = default_variants(t);
  return c;
}

TEST(RunPipeline, SmokeAndBookkeeping) {
  fs::path out = fresh_dir("run");
  PipelineConfig c = tiny_config(out);
  PipelineReport r = run_pipeline(c);
  EXPECT_EQ(r.variant_names.size(), 4u);
  EXPECT_EQ(r.test_accuracy.size(), 4u);
  std::istringstream acc(r.accuracy_csv);
  std::string header, row, extra;
  std::getline(acc, header);
  std::getline(acc, row);
  EXPECT_EQ(header, "dataset,baseline,dsm_regularization,dsm_hidden_layer,"
                    "dsm_edge_weights");
  EXPECT_EQ(row.substr(0, 5), "tiny,");
  EXPECT_FALSE(std::getline(acc, extra));

  RgcnGraph g = build_rgcn_graph(graph_from_json(
      load_json((out / "split.json").string())));
  std::istringstream cw(r.classwise_csv);
  std::getline(cw, header);
  int64_t support = 0;
  while (std::getline(cw, row)) {
    support += std::stoll(row.substr(row.find(',') + 1));
  }
  EXPECT_EQ(support, static_cast<int64_t>(g.test.size()));

  for (const char* f : {"config.json", "documents.jsonl", "mentions.jsonl",
                        "features.json", "index.json", "dsm.jsonl",
                        "graph.json", "stats.json", "split.json",
                        "accuracy.csv", "classwise.csv",
                        "checkpoints/baseline.json",
                        "history/dsm_edge_weights.csv"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
}

TEST(RunPipeline, StagewiseEqualsRun) {
  fs::path a = fresh_dir("stage_a");
  fs::path b = fresh_dir("stage_b");
  run_pipeline(tiny_config(a));
  PipelineConfig c = tiny_config(b);
  stage_synth(c);
  stage_parse(c);
  stage_annotate(c);
  stage_index(c);
  stage_dsm(c);
  stage_build_graph(c);
  stage_split(c);
  stage_train(c);
  stage_eval(c);
  for (const char* f : {"accuracy.csv", "classwise.csv", "dsm.jsonl",
                        "checkpoints/dsm_hidden_layer.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Stages, MissingInputsNameTheStage) {
  fs::path out = fresh_dir("missing");
  PipelineConfig c = tiny_config(out);
  try {
    stage_index(c);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("[index]"), std::string::npos)
        << e.what();
  }
}

TEST(ParseCorpus, ErrorsCarryFileName) {
  fs::path dir = fresh_dir("badcorpus");
  std::ofstream(dir / "good.md") << "# Fine\ntext\n";
  std::ofstream(dir / "bad.md") << "# T\n{{infobox\na = b\n";
  try {
    parse_corpus(dir.string());
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedMarkup);
    EXPECT_NE(std::string(e.what()).find("bad.md"), std::string::npos);
  }
}

std::pair<int, std::string> run_tool(const std::string& args) {
  std::string cmd = std::string(DSMTOOL_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe)) out += buf;
  int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

TEST(Cli, ExitCodesAndStageTags) {
  auto [code, out] = run_tool("parse --config /nonexistent/config.json");
  EXPECT_NE(code, 0);
  EXPECT_NE(out.find("[config]"), std::string::npos) << out;

  fs::path dir = fresh_dir("cli");
  auto [c2, o2] = run_tool("index --config /dev/null");
  EXPECT_NE(c2, 0);

  std::ofstream(dir / "cfg.json")
      << R"({"dataset": "cli", "synth": {"n_entities": 40, "n_relation_types": 2,)"
      << R"( "edges_per_relation": 10}, "train": {"epochs": 3, "hidden_dim": 4}})";
  auto [c3, o3] = run_tool("train --config " + (dir / "cfg.json").string() +
                           " --out " + (dir / "out").string());
  EXPECT_NE(c3, 0);
  EXPECT_NE(o3.find("[train]"), std::string::npos) << o3;

  auto [c4, o4] = run_tool("run --config " + (dir / "cfg.json").string() +
                           " --out " + (dir / "out").string() + " --seed 2");
  EXPECT_EQ(c4, 0) << o4;
  EXPECT_NE(o4.find("dataset,baseline"), std::string::npos);

  auto [c5, o5] = run_tool("bogus");
  EXPECT_NE(c5, 0);
}

}  // namespace
}  // namespace dsm
