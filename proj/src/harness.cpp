#include "dsm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "dsm/dsmcore.hpp"
#include "dsm/error.hpp"
#include "dsm/random.hpp"
#include "text_util.hpp"

namespace dsm {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Synthetic corpora

namespace {

struct RelationSchema {
  const char* name;
  const char* heading;
  int subject_type;
  int object_type;
  bool symmetric;  // rendered on both entities' pages
};

constexpr const char* kTypes[] = {"person", "organization", "place", "work"};
constexpr const char* kArticles[] = {"a", "an", "a", "a"};

constexpr RelationSchema kRelations[] = {
    {"sibling", "Siblings", 0, 0, true},
    {"employer", "Employers", 0, 1, false},
    {"birthplace", "Birthplace", 0, 2, false},
    {"headquarters", "Headquarters", 1, 2, false},
    {"author_of", "Works", 0, 3, false},
    {"spouse", "Spouses", 0, 0, true},
    {"publisher", "Publishers", 3, 1, false},
    {"member_of", "Memberships", 0, 1, false},
};

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n",
                                   "p", "r", "s", "t", "v", "z", "br", "dr",
                                   "kl", "st", "th", "tr"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ei", "ou"};

constexpr const char* kBodyTemplates[] = {
    "{s} was mentioned together with {o}.",
    "In one account {s} appears next to {o}.",
    "Records place {s} near {o} at some point.",
    "{o} is named in a story about {s}.",
};

constexpr const char* kDistractorTemplates[] = {
    "A later note also names {o}.",
    "Some readers confuse this entry with {o}.",
};

std::string make_word(Rng& rng, int syllables) {
  std::string w;
  for (int i = 0; i < syllables; ++i) {
    w += kOnsets[rng.below(std::size(kOnsets))];
    w += kVowels[rng.below(std::size(kVowels))];
  }
  w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::string fill(std::string_view tmpl, const std::string& s,
                 const std::string& o) {
  std::string out;
  for (size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl.substr(i, 3) == "{s}") {
      out += s;
      i += 2;
    } else if (tmpl.substr(i, 3) == "{o}") {
      out += o;
      i += 2;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

std::string entity_id(int i) {
  std::string n = std::to_string(i);
  return "e" + std::string(n.size() < 4 ? 4 - n.size() : 0, '0') + n;
}

void check_spec(const SynthSpec& spec) {
  if (spec.n_entities < 1 || spec.n_relation_types < 1 ||
      spec.edges_per_relation < 1 || spec.docs_per_entity < 1 ||
      spec.distractors_per_doc < 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic counts must be >= 1");
  }
  if (!(spec.p_struct >= 0.0 && spec.p_struct <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "p_struct must lie in [0, 1]");
  }
  if (spec.n_relation_types > static_cast<int>(std::size(kRelations))) {
    throw Error(ErrorCode::kInvalidArgument,
                "at most " + std::to_string(std::size(kRelations)) +
                    " relation types are supported");
  }
}

}  // namespace

SynthCorpus synth_corpus(const SynthSpec& spec) {
  check_spec(spec);
  Rng rng(spec.seed);

  // Entities are spread over the types the chosen relations use.
  std::vector<int> used_types;
  for (int r = 0; r < spec.n_relation_types; ++r) {
    for (int t : {kRelations[r].subject_type, kRelations[r].object_type}) {
      if (std::find(used_types.begin(), used_types.end(), t) ==
          used_types.end()) {
        used_types.push_back(t);
      }
    }
  }
  std::sort(used_types.begin(), used_types.end());

  const int n = spec.n_entities;
  std::vector<std::string> names(n);
  std::vector<int> type_of(n);
  std::set<std::string> taken;
  for (int i = 0; i < n; ++i) {
    type_of[i] = used_types[i % used_types.size()];
    std::string name;
    do {
      name = make_word(rng, 2) + " " + make_word(rng, 1 + int(rng.below(2)));
    } while (!taken.insert(normalize_surface(name)).second);
    names[i] = name;
  }
  std::map<int, std::vector<int>> by_type;
  for (int i = 0; i < n; ++i) by_type[type_of[i]].push_back(i);

  SynthCorpus corpus;
  struct Placed {
    int s;
    int r;
    int o;
    std::string feature;
  };
  std::vector<Placed> placed;
  std::set<std::pair<int, int>> linked;  // unordered pairs already used
  for (int r = 0; r < spec.n_relation_types; ++r) {
    const auto& subjects = by_type[kRelations[r].subject_type];
    const auto& objects = by_type[kRelations[r].object_type];
    int made = 0;
    for (int attempt = 0;
         made < spec.edges_per_relation && attempt < 1000 * spec.edges_per_relation;
         ++attempt) {
      const int s = subjects[rng.below(subjects.size())];
      const int o = objects[rng.below(objects.size())];
      if (s == o || linked.contains({std::min(s, o), std::max(s, o)})) continue;
      linked.insert({std::min(s, o), std::max(s, o)});
      std::string feature = "body";
      if (rng.bernoulli(spec.p_struct)) {
        feature = rng.bernoulli(0.5) ? "infobox" : "bullets";
      }
      placed.push_back({s, r, o, feature});
      ++made;
    }
    if (made < spec.edges_per_relation) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("not enough distinct entity pairs for relation ") +
                      kRelations[r].name);
    }
  }

  for (const Placed& p : placed) {
    corpus.triples.push_back(SynthTriple{
        entity_id(p.s), kRelations[p.r].name, entity_id(p.o),
        kTypes[type_of[p.s]], kTypes[type_of[p.o]], p.feature != "body",
        p.feature});
  }

  // A triple is rendered on its subject's pages, and for symmetric
  // relations also on its object's pages with the roles swapped. Each
  // entity's triples are spread round-robin over its pages.
  std::vector<Placed> rendered;
  for (const Placed& p : placed) {
    rendered.push_back(p);
    if (kRelations[p.r].symmetric) rendered.push_back({p.o, p.r, p.s, p.feature});
  }
  std::vector<std::vector<std::vector<const Placed*>>> per_doc(
      n, std::vector<std::vector<const Placed*>>(spec.docs_per_entity));
  std::vector<int> next_doc(n, 0);
  for (const Placed& p : rendered) {
    per_doc[p.s][next_doc[p.s]++ % spec.docs_per_entity].push_back(&p);
  }

  for (int e = 0; e < n; ++e) {
    std::set<int> related;
    for (const Placed& p : placed) {
      if (p.s == e) related.insert(p.o);
      if (p.o == e) related.insert(p.s);
    }
    for (int d = 0; d < spec.docs_per_entity; ++d) {
      const auto& mine = per_doc[e][d];
      const std::string& s = names[e];
      std::string md = "# " + s + "\n\n";
      md += s + " is " + kArticles[type_of[e]] + " " + kTypes[type_of[e]] +
            " in this collection.\n\n";

      md += "{{infobox\ntype = " + std::string(kTypes[type_of[e]]) + "\n";
      for (const Placed* p : mine) {
        if (p->feature == "infobox") {
          md += std::string(kRelations[p->r].name) + " = " + names[p->o] + "\n";
        }
      }
      md += "}}\n\n";

      for (int r = 0; r < spec.n_relation_types; ++r) {
        std::vector<int> items;
        for (const Placed* p : mine) {
          if (p->feature == "bullets" && p->r == r) items.push_back(p->o);
        }
        if (items.empty()) continue;
        md += "## " + std::string(kRelations[r].heading) + "\n\n";
        md += s + " is listed with the following:\n";
        for (int o : items) md += "- " + names[o] + "\n";
        md += "\n";
      }

      std::vector<std::string> sentences;
      for (const Placed* p : mine) {
        if (p->feature != "body") continue;
        sentences.push_back(
            fill(kBodyTemplates[rng.below(std::size(kBodyTemplates))], s,
                 names[p->o]));
      }
      for (int k = 0; k < spec.distractors_per_doc && n > 1; ++k) {
        int o = static_cast<int>(rng.below(n));
        if (o == e || related.contains(o)) continue;
        sentences.push_back(fill(
            kDistractorTemplates[rng.below(std::size(kDistractorTemplates))],
            s, names[o]));
      }
      if (!sentences.empty()) {
        rng.shuffle(sentences);
        md += "## Notes\n\n" + join(sentences, " ") + "\n";
      }
      std::string id = entity_id(e);
      if (d > 0) id += "_" + std::to_string(d + 1);
      corpus.documents.emplace_back(id, md);
    }
  }

  std::vector<Gazetteer> gaz;
  for (int t : used_types) gaz.emplace_back(kTypes[t]);
  for (int e = 0; e < n; ++e) {
    auto it = std::find(used_types.begin(), used_types.end(), type_of[e]);
    gaz[it - used_types.begin()].add(names[e], entity_id(e));
  }
  corpus.gazetteers = std::move(gaz);
  return corpus;
}

std::string triples_tsv(const SynthCorpus& corpus) {
  std::string out;
  for (const SynthTriple& t : corpus.triples) {
    out += t.subject + "\t" + t.relation + "\t" + t.object + "\t" +
           t.subject_type + "\t" + t.object_type + "\n";
  }
  return out;
}

std::string ledger_tsv(const SynthCorpus& corpus) {
  std::string out = "subject\trelation\tobject\tstructural\tfeature\n";
  for (const SynthTriple& t : corpus.triples) {
    out += t.subject + "\t" + t.relation + "\t" + t.object + "\t" +
           (t.structural ? "1" : "0") + "\t" + t.feature + "\n";
  }
  return out;
}

SynthPaths write_synth(const SynthCorpus& corpus, const std::string& dir) {
  SynthPaths paths{dir + "/corpus", dir + "/gazetteer.tsv",
                   dir + "/triples.tsv", dir + "/ledger.tsv"};
  if (fs::exists(paths.corpus_dir)) fs::remove_all(paths.corpus_dir);
  fs::create_directories(paths.corpus_dir);
  for (const auto& [id, text] : corpus.documents) {
    write_file(paths.corpus_dir + "/" + id + ".md", text);
  }
  write_file(paths.gazetteer, serialize_gazetteers(corpus.gazetteers));
  write_file(paths.triples, triples_tsv(corpus));
  write_file(paths.ledger, ledger_tsv(corpus));
  return paths;
}

Json to_json(const SynthSpec& spec) {
  return {{"seed", spec.seed},
          {"n_entities", spec.n_entities},
          {"n_relation_types", spec.n_relation_types},
          {"edges_per_relation", spec.edges_per_relation},
          {"p_struct", spec.p_struct},
          {"docs_per_entity", spec.docs_per_entity},
          {"distractors_per_doc", spec.distractors_per_doc}};
}

namespace {

template <typename F>
auto json_guard(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string(what) + ": " + e.what());
  }
}

}  // namespace

SynthSpec synth_spec_from_json(const Json& j, const SynthSpec& defaults) {
  SynthSpec s = json_guard("synth spec", [&] {
    SynthSpec s = defaults;
    s.seed = j.value("seed", s.seed);
    s.n_entities = j.value("n_entities", s.n_entities);
    s.n_relation_types = j.value("n_relation_types", s.n_relation_types);
    s.edges_per_relation = j.value("edges_per_relation", s.edges_per_relation);
    s.p_struct = j.value("p_struct", s.p_struct);
    s.docs_per_entity = j.value("docs_per_entity", s.docs_per_entity);
    s.distractors_per_doc = j.value("distractors_per_doc", s.distractors_per_doc);
    return s;
  });
  check_spec(s);
  return s;
}

// ---------------------------------------------------------------------------
// Configuration

std::vector<TrainConfig> default_variants(const TrainConfig& base) {
  std::vector<TrainConfig> out;
  for (Variant v : {Variant::kBaseline, Variant::kDsmRegularization,
                    Variant::kDsmHiddenLayer, Variant::kDsmEdgeWeights}) {
    TrainConfig c = base;
    c.variant.variant = v;
    if (v == Variant::kDsmRegularization && c.variant.lambda == 0.0) {
      c.variant.lambda = 0.5;
    }
    if (v != Variant::kDsmRegularization) c.variant.lambda = 0.0;
    out.push_back(c);
  }
  return out;
}

PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c = json_guard("config", [&] {
    if (!j.is_object()) {
      throw Error(ErrorCode::kParseError, "config must be a JSON object");
    }
    PipelineConfig c;
    c.dataset = j.value("dataset", c.dataset);
    c.corpus_dir = j.value("corpus_dir", c.corpus_dir);
    c.gazetteer = j.value("gazetteer", c.gazetteer);
    c.triples = j.value("triples", c.triples);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("synth") && !j["synth"].is_null()) {
      c.use_synth = true;
      c.synth = synth_spec_from_json(j["synth"], c.synth);
    }
    if (j.contains("features")) c.catalog = catalog_from_json(j["features"]);
    if (j.contains("dsm")) {
      const Json& d = j["dsm"];
      if (j.contains("features")) {
        throw Error(ErrorCode::kInvalidArgument,
                    "give either 'features' or 'dsm', not both");
      }
      c.catalog = FeatureCatalog::standard(d.value("include_absolute", true),
                                           d.value("absolute_weight", 0.0));
    }
    if (j.contains("split")) {
      const Json& s = j["split"];
      if (s.contains("fractions")) {
        auto f = s["fractions"].get<std::vector<double>>();
        if (f.size() != 3) {
          throw Error(ErrorCode::kInvalidArgument,
                      "split.fractions needs three values");
        }
        c.split_fractions = {f[0], f[1], f[2]};
      }
      c.split_seed = s.value("seed", c.split_seed);
    }
    TrainConfig base;
    if (j.contains("train")) base = train_config_from_json(j["train"], base);
    if (j.contains("variants")) {
      for (const Json& v : j["variants"]) {
        c.variants.push_back(train_config_from_json(v, base));
      }
    } else {
      c.variants = default_variants(base);
    }
    return c;
  });
  if (c.variants.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one variant is required");
  }
  if (!c.use_synth &&
      (c.corpus_dir.empty() || c.gazetteer.empty() || c.triples.empty())) {
    throw Error(ErrorCode::kInvalidArgument,
                "config needs corpus_dir, gazetteer and triples, or a synth "
                "block");
  }
  return c;
}

Json to_json(const PipelineConfig& c) {
  Json j = {{"dataset", c.dataset}};
  if (c.use_synth) {
    j["synth"] = to_json(c.synth);
  } else {
    j["corpus_dir"] = c.corpus_dir;
    j["gazetteer"] = c.gazetteer;
    j["triples"] = c.triples;
  }
  j["output_dir"] = c.output_dir;
  j["features"] = to_json(c.catalog);
  j["split"] = {{"fractions", c.split_fractions}, {"seed", c.split_seed}};
  Json variants = Json::array();
  for (const TrainConfig& t : c.variants) variants.push_back(to_json(t));
  j["variants"] = std::move(variants);
  return j;
}

PipelineConfig load_config(const std::string& path) {
  return config_from_json(load_json(path));
}

void override_seed(PipelineConfig* config, uint64_t seed) {
  config->synth.seed = seed;
  config->split_seed = seed;
  for (TrainConfig& t : config->variants) t.seed = seed;
}

void validate_paths(const PipelineConfig& config) {
  if (config.use_synth) return;
  for (const std::string& p : {config.corpus_dir, config.gazetteer,
                               config.triples}) {
    if (!fs::exists(p)) {
      throw Error(ErrorCode::kInvalidArgument, "missing input path " + p);
    }
  }
}

// ---------------------------------------------------------------------------
// Stages

std::vector<Document> parse_corpus(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "corpus directory " + dir + " not found");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Document> docs;
  for (const fs::path& f : files) {
    try {
      docs.push_back(parse_document(read_file(f.string()), f.stem().string()));
    } catch (const Error& e) {
      throw Error(e, f.filename().string());
    }
  }
  return docs;
}

std::vector<Mention> annotate_corpus(std::span<const Document> enriched,
                                     std::span<const Gazetteer> gazetteers) {
  if (gazetteers.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no gazetteers supplied");
  }
  Annotator annotator(gazetteers);
  std::vector<Mention> out;
  for (const Document& d : enriched) {
    auto m = annotator.annotate(d);
    out.insert(out.end(), m.begin(), m.end());
  }
  return out;
}

TypedGraph build_graph(const TypedGraph& triples, const DsmTable& records) {
  return attach_dsm(add_self_loops(triples), records);
}

VariantResult train_and_evaluate(const RgcnGraph& graph,
                                 const TrainConfig& config) {
  VariantResult r;
  r.config = config;
  r.training = train(graph, config);
  r.test_predictions = predict_pairs(r.training.params, graph, graph.test);
  int64_t correct = 0;
  for (size_t i = 0; i < graph.test.size(); ++i) {
    if (r.test_predictions[i] ==
        graph.class_relations[graph.test[i].label]) {
      ++correct;
    }
  }
  r.test_accuracy = graph.test.empty()
                        ? 0.0
                        : static_cast<double>(correct) /
                              static_cast<double>(graph.test.size());
  return r;
}

std::string report_classwise(const RgcnGraph& graph,
                             const std::vector<std::string>& relation_names,
                             const std::vector<std::string>& variant_names,
                             const std::vector<std::vector<int>>& predictions) {
  if (predictions.size() != variant_names.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "one prediction list per variant is required");
  }
  for (const auto& p : predictions) {
    if (p.size() != graph.test.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "predictions must cover the test split");
    }
  }
  std::string out = "relation,support";
  for (const std::string& v : variant_names) out += "," + v + "_acc";
  out += "\n";
  const size_t classes = graph.class_relations.size();
  std::vector<int64_t> support(classes, 0);
  std::vector<std::vector<int64_t>> correct(
      variant_names.size(), std::vector<int64_t>(classes, 0));
  for (size_t i = 0; i < graph.test.size(); ++i) {
    const int c = graph.test[i].label;
    ++support[c];
    for (size_t v = 0; v < predictions.size(); ++v) {
      if (predictions[v][i] == graph.class_relations[c]) ++correct[v][c];
    }
  }
  for (size_t c = 0; c < classes; ++c) {
    if (support[c] == 0) continue;
    out += relation_names[graph.class_relations[c]] + "," +
           std::to_string(support[c]);
    for (size_t v = 0; v < predictions.size(); ++v) {
      out += "," + format_double(static_cast<double>(correct[v][c]) /
                                 static_cast<double>(support[c]));
    }
    out += "\n";
  }
  return out;
}

std::string accuracy_table(const std::string& dataset,
                           const std::vector<std::string>& variant_names,
                           const std::vector<double>& accuracies) {
  std::string out = "dataset";
  for (const std::string& v : variant_names) out += "," + v;
  out += "\n" + dataset;
  for (double a : accuracies) out += "," + format_double(a);
  return out + "\n";
}

void rethrow_with_stage(const std::string& stage) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e, stage);
  } catch (const std::exception& e) {
    throw Error(Error(ErrorCode::kIo, e.what()), stage);
  }
}

std::vector<std::string> variant_labels(
    const std::vector<TrainConfig>& variants) {
  std::vector<std::string> names;
  std::map<std::string, int> seen;
  for (const TrainConfig& t : variants) {
    std::string base(variant_name(t.variant.variant));
    const int n = ++seen[base];
    names.push_back(n == 1 ? base : base + "_" + std::to_string(n));
  }
  return names;
}

namespace {

// Runs `f`, tagging any failure with `name`.
template <typename F>
auto tagged(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (...) {
    rethrow_with_stage(name);
  }
}

struct Inputs {
  std::string corpus_dir;
  std::string gazetteer;
  std::string triples;
};

Inputs inputs(const PipelineConfig& c) {
  if (c.use_synth) {
    const std::string d = c.output_dir + "/synth";
    return {d + "/corpus", d + "/gazetteer.tsv", d + "/triples.tsv"};
  }
  return {c.corpus_dir, c.gazetteer, c.triples};
}

std::string at(const PipelineConfig& c, const std::string& file) {
  return c.output_dir + "/" + file;
}

std::vector<Document> read_documents(const PipelineConfig& c) {
  std::vector<Document> docs;
  for (const Json& j : parse_jsonl(read_file(at(c, "documents.jsonl")))) {
    docs.push_back(document_from_json(j));
  }
  return docs;
}

TypedGraph read_graph(const PipelineConfig& c, const std::string& file) {
  return graph_from_json(load_json(at(c, file)));
}

}  // namespace

void stage_synth(const PipelineConfig& config) {
  tagged("synth", [&] {
    write_synth(synth_corpus(config.synth), config.output_dir + "/synth");
  });
}

void stage_parse(const PipelineConfig& config) {
  tagged("parse", [&] {
    std::vector<Json> lines;
    for (const Document& d : parse_corpus(inputs(config).corpus_dir)) {
      lines.push_back(to_json(d));
    }
    write_file(at(config, "documents.jsonl"), dump_jsonl(lines));
  });
}

void stage_annotate(const PipelineConfig& config) {
  tagged("annotate", [&] {
    auto enriched = enrich_units(read_documents(config));
    auto gaz = load_gazetteers(inputs(config).gazetteer);
    std::vector<Json> lines;
    for (const Mention& m : annotate_corpus(enriched, gaz)) {
      lines.push_back(to_json(m));
    }
    write_file(at(config, "mentions.jsonl"), dump_jsonl(lines));
  });
}

void stage_index(const PipelineConfig& config) {
  tagged("index", [&] {
    auto enriched = enrich_units(read_documents(config));
    std::vector<Mention> mentions;
    for (const Json& j : parse_jsonl(read_file(at(config, "mentions.jsonl")))) {
      mentions.push_back(mention_from_json(j));
    }
    CorpusIndex index = build_index(enriched, mentions, config.catalog);
    write_file(at(config, "features.json"), dump_json(to_json(config.catalog)));
    write_file(at(config, "index.json"), dump_json(to_json(index)));
  });
}

void stage_dsm(const PipelineConfig& config) {
  tagged("dsm", [&] {
    CorpusIndex index = index_from_json(load_json(at(config, "index.json")));
    FeatureCatalog catalog =
        catalog_from_json(load_json(at(config, "features.json")));
    TypedGraph triples = load_triples(inputs(config).triples);
    std::vector<Json> lines;
    for (const auto& [key, rec] : dsm_for_graph(index, catalog, triples)) {
      lines.push_back(to_json(rec));
    }
    write_file(at(config, "dsm.jsonl"), dump_jsonl(lines));
  });
}

void stage_build_graph(const PipelineConfig& config) {
  tagged("build-graph", [&] {
    TypedGraph triples = load_triples(inputs(config).triples);
    DsmTable records;
    for (const Json& j : parse_jsonl(read_file(at(config, "dsm.jsonl")))) {
      DsmRecord r = dsm_record_from_json(j);
      PairKey key{r.x, r.y};
      records.emplace(std::move(key), std::move(r));
    }
    TypedGraph g = build_graph(triples, records);
    const auto docs = parse_jsonl(read_file(at(config, "documents.jsonl")));
    write_file(at(config, "graph.json"), dump_json(to_json(g)));
    write_file(at(config, "stats.json"),
               dump_json(to_json(stats(g, static_cast<int64_t>(docs.size())))));
  });
}

void stage_split(const PipelineConfig& config) {
  tagged("split", [&] {
    TypedGraph g = split_edges(read_graph(config, "graph.json"),
                               config.split_fractions, config.split_seed);
    write_file(at(config, "split.json"), dump_json(to_json(g)));
  });
}

void stage_train(const PipelineConfig& config) {
  tagged("train", [&] {
    const RgcnGraph rg = build_rgcn_graph(read_graph(config, "split.json"));
    const auto labels = variant_labels(config.variants);
    for (size_t v = 0; v < config.variants.size(); ++v) {
      TrainResult r = train(rg, config.variants[v]);
      write_file(at(config, "checkpoints/" + labels[v] + ".json"),
                 dump_json(to_json(r.params)));
      write_file(at(config, "history/" + labels[v] + ".csv"),
                 history_csv(r.history));
    }
  });
}

PipelineReport stage_eval(const PipelineConfig& config) {
  return tagged("eval", [&] {
    const TypedGraph g = read_graph(config, "split.json");
    const RgcnGraph rg = build_rgcn_graph(g);
    PipelineReport report;
    const Json st = load_json(at(config, "stats.json"));
    report.stats = DatasetStats{st.at("documents").get<int64_t>(),
                                st.at("nodes").get<int64_t>(),
                                st.at("node_types").get<int64_t>(),
                                st.at("relation_types").get<int64_t>()};
    report.variant_names = variant_labels(config.variants);
    std::vector<std::vector<int>> predictions;
    for (const std::string& name : report.variant_names) {
      ModelParams p = params_from_json(
          load_json(at(config, "checkpoints/" + name + ".json")));
      predictions.push_back(predict_pairs(p, rg, rg.test));
      int64_t correct = 0;
      for (size_t i = 0; i < rg.test.size(); ++i) {
        if (predictions.back()[i] == rg.class_relations[rg.test[i].label]) {
          ++correct;
        }
      }
      report.test_accuracy.push_back(
          rg.test.empty() ? 0.0
                          : static_cast<double>(correct) /
                                static_cast<double>(rg.test.size()));
    }
    report.accuracy_csv = accuracy_table(config.dataset, report.variant_names,
                                         report.test_accuracy);
    report.classwise_csv = report_classwise(rg, g.relations,
                                            report.variant_names, predictions);
    write_file(at(config, "accuracy.csv"), report.accuracy_csv);
    write_file(at(config, "classwise.csv"), report.classwise_csv);
    return report;
  });
}

PipelineReport run_pipeline(const PipelineConfig& config) {
  tagged("config", [&] {
    validate_paths(config);
    write_file(at(config, "config.json"), dump_json(to_json(config)));
  });
  if (config.use_synth) stage_synth(config);
  stage_parse(config);
  stage_annotate(config);
  stage_index(config);
  stage_dsm(config);
  stage_build_graph(config);
  stage_split(config);
  stage_train(config);
  return stage_eval(config);
}

}  // namespace dsm
