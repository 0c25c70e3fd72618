#pragma once

// End-to-end pipeline: synthetic corpora, configuration, the staged run and
// its reports.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dsm/corpusindex.hpp"
#include "dsm/docstruct.hpp"
#include "dsm/graphset.hpp"
#include "dsm/json_io.hpp"
#include "dsm/rgcn.hpp"

namespace dsm {

// ---------------------------------------------------------------------------
// Synthetic corpora

struct SynthSpec {
  uint64_t seed = 0;
  int n_entities = 200;
  int n_relation_types = 5;
  int edges_per_relation = 40;
  // Probability that a triple is rendered through a structural feature
  // (infobox row or bullet list under a heading naming the relation) rather
  // than as a plain body-text co-occurrence.
  double p_struct = 0.8;
  int docs_per_entity = 1;
  // Unrelated entities mentioned in each document's body.
  int distractors_per_doc = 2;

  bool operator==(const SynthSpec&) const = default;
};

struct SynthTriple {
  std::string subject;
  std::string relation;
  std::string object;
  std::string subject_type;
  std::string object_type;
  bool structural = false;
  std::string feature;  // "infobox", "bullets" or "body"
};

struct SynthCorpus {
  std::vector<std::pair<std::string, std::string>> documents;  // id, markup
  std::vector<Gazetteer> gazetteers;
  std::vector<SynthTriple> triples;
};

// Throws Error{kInvalidArgument} for an invalid spec.
SynthCorpus synth_corpus(const SynthSpec& spec);

std::string triples_tsv(const SynthCorpus& corpus);
// `subject<TAB>relation<TAB>object<TAB>structural<TAB>feature`
std::string ledger_tsv(const SynthCorpus& corpus);

struct SynthPaths {
  std::string corpus_dir;
  std::string gazetteer;
  std::string triples;
  std::string ledger;
};

// Writes corpus/<id>.md, gazetteer.tsv, triples.tsv and ledger.tsv under dir.
SynthPaths write_synth(const SynthCorpus& corpus, const std::string& dir);

Json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const Json& j, const SynthSpec& defaults);

// ---------------------------------------------------------------------------
// Configuration

struct PipelineConfig {
  std::string dataset = "dataset";
  std::string corpus_dir;
  std::string gazetteer;
  std::string triples;
  std::string output_dir = "out";
  // When set, `run` generates the corpus into <output_dir>/synth and uses it
  // in place of the three input paths.
  bool use_synth = false;
  SynthSpec synth;
  FeatureCatalog catalog = FeatureCatalog::standard();
  SplitFractions split_fractions{0.8, 0.1, 0.1};
  uint64_t split_seed = 0;
  std::vector<TrainConfig> variants;
};

// The four variants with shared hyperparameters.
std::vector<TrainConfig> default_variants(const TrainConfig& base);

// Missing keys take their defaults. Throws Error{kInvalidArgument} for
// inconsistent settings and Error{kParseError} for malformed JSON.
PipelineConfig config_from_json(const Json& j);
Json to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::string& path);

// Replaces the split, training and synthetic seeds.
void override_seed(PipelineConfig* config, uint64_t seed);

// Throws Error{kInvalidArgument} if a referenced input path is missing.
void validate_paths(const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Stages

// Parses every regular file of `dir` in name order; the document id is the
// file name without extension.
std::vector<Document> parse_corpus(const std::string& dir);

std::vector<Mention> annotate_corpus(std::span<const Document> enriched,
                                     std::span<const Gazetteer> gazetteers);

// Triples + DSM records -> graph with self-loops and attached records.
TypedGraph build_graph(const TypedGraph& triples, const DsmTable& records);

struct VariantResult {
  TrainConfig config;
  TrainResult training;
  std::vector<int> test_predictions;  // relation ids, aligned with test pairs
  double test_accuracy = 0.0;
};

// Test-set predictions of every variant for one graph.
VariantResult train_and_evaluate(const RgcnGraph& graph,
                                 const TrainConfig& config);

// `relation,support,<variant>_acc,...`; one row per relation with test
// support, in relation-id order. Accuracy columns follow `variants` order.
std::string report_classwise(const RgcnGraph& graph,
                             const std::vector<std::string>& relation_names,
                             const std::vector<std::string>& variant_names,
                             const std::vector<std::vector<int>>& predictions);

// `dataset,<variant>,...` header plus one row.
std::string accuracy_table(const std::string& dataset,
                           const std::vector<std::string>& variant_names,
                           const std::vector<double>& accuracies);

struct PipelineReport {
  DatasetStats stats;
  std::vector<std::string> variant_names;
  std::vector<double> test_accuracy;
  std::string accuracy_csv;
  std::string classwise_csv;
};

// File-based stages. Each reads its inputs from the configured sources and
// the files earlier stages left in config.output_dir:
//
//   synth        synth/{corpus/, gazetteer.tsv, triples.tsv, ledger.tsv}
//   parse        documents.jsonl
//   annotate     mentions.jsonl
//   index        features.json, index.json
//   dsm          dsm.jsonl
//   build-graph  graph.json, stats.json
//   split        split.json
//   train        checkpoints/<variant>.json, history/<variant>.csv
//   eval         accuracy.csv, classwise.csv
//
// Failures are rethrown with the stage name in the message.
void stage_synth(const PipelineConfig& config);
void stage_parse(const PipelineConfig& config);
void stage_annotate(const PipelineConfig& config);
void stage_index(const PipelineConfig& config);
void stage_dsm(const PipelineConfig& config);
void stage_build_graph(const PipelineConfig& config);
void stage_split(const PipelineConfig& config);
void stage_train(const PipelineConfig& config);
PipelineReport stage_eval(const PipelineConfig& config);

// Variant labels used for file names and report columns; repeated variants
// get a numeric suffix.
std::vector<std::string> variant_labels(const std::vector<TrainConfig>& variants);

// All stages in order; writes config.json as well.
PipelineReport run_pipeline(const PipelineConfig& config);

// Inside a catch block: rethrows the active exception as an Error tagged
// with `stage`, keeping the code of library errors.
[[noreturn]] void rethrow_with_stage(const std::string& stage);

}  // namespace dsm
