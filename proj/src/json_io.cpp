#include "dsm/json_io.hpp"

#include <utility>

#include "dsm/error.hpp"
#include "text_util.hpp"

namespace dsm {

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::kParseError, what);
}

// Runs a decoder, mapping library exceptions to Error{kParseError}.
template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    bad(std::string(what) + ": " + e.what());
  }
}

constexpr std::pair<BlockKind, std::string_view> kBlockNames[] = {
    {BlockKind::kTitle, "title"},
    {BlockKind::kSectionHeading, "section_heading"},
    {BlockKind::kParagraph, "paragraph"},
    {BlockKind::kBulletList, "bullet_list"},
    {BlockKind::kInfobox, "infobox"},
    {BlockKind::kFootnote, "footnote"},
};

std::string_view block_name(BlockKind k) {
  for (const auto& [kind, name] : kBlockNames) {
    if (kind == k) return name;
  }
  return "";
}

BlockKind block_from_name(const std::string& s) {
  for (const auto& [kind, name] : kBlockNames) {
    if (name == s) return kind;
  }
  bad("unknown block kind '" + s + "'");
}

Split split_from_name(const std::string& s) {
  for (Split sp : {Split::kTrain, Split::kVal, Split::kTest}) {
    if (split_name(sp) == s) return sp;
  }
  bad("unknown split '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Documents and mentions

Json to_json(const Document& doc) {
  Json blocks = Json::array();
  for (const Block& b : doc.blocks) {
    Json jb = {{"kind", block_name(b.kind)}};
    if (b.level != 0) jb["level"] = b.level;
    if (!b.text.empty()) jb["text"] = b.text;
    if (!b.spans.empty()) {
      Json spans = Json::array();
      for (const Span& s : b.spans) {
        spans.push_back({{"kind", span_kind_name(s.kind)}, {"text", s.text}});
      }
      jb["spans"] = std::move(spans);
    }
    if (!b.items.empty()) jb["items"] = b.items;
    if (!b.pairs.empty()) {
      Json pairs = Json::array();
      for (const auto& [k, v] : b.pairs) pairs.push_back({k, v});
      jb["pairs"] = std::move(pairs);
    }
    if (!b.section.empty()) jb["section"] = b.section;
    blocks.push_back(std::move(jb));
  }
  return {{"id", doc.id},
          {"title", doc.title},
          {"enriched", doc.enriched},
          {"blocks", std::move(blocks)}};
}

Document document_from_json(const Json& j) {
  return guarded("document", [&] {
    Document d;
    d.id = j.at("id").get<std::string>();
    d.title = j.at("title").get<std::string>();
    d.enriched = j.value("enriched", false);
    for (const Json& jb : j.at("blocks")) {
      Block b;
      b.kind = block_from_name(jb.at("kind").get<std::string>());
      b.level = jb.value("level", 0);
      b.text = jb.value("text", "");
      if (jb.contains("spans")) {
        for (const Json& js : jb["spans"]) {
          Span s;
          if (!span_kind_from_name(js.at("kind").get<std::string>(), &s.kind)) {
            bad("unknown span kind");
          }
          s.text = js.at("text").get<std::string>();
          b.spans.push_back(std::move(s));
        }
      }
      if (jb.contains("items")) {
        b.items = jb["items"].get<std::vector<std::string>>();
      }
      if (jb.contains("pairs")) {
        for (const Json& jp : jb["pairs"]) {
          b.pairs.emplace_back(jp.at(0).get<std::string>(),
                               jp.at(1).get<std::string>());
        }
      }
      b.section = jb.value("section", "");
      d.blocks.push_back(std::move(b));
    }
    return d;
  });
}

Json to_json(const Mention& m) {
  return {{"entity", m.entity_id},
          {"type", m.entity_type},
          {"doc", m.doc_id},
          {"unit", m.unit_index},
          {"position", position_name(m.position)},
          {"span", span_kind_name(m.span_kind)},
          {"block", m.block},
          {"context", m.context}};
}

Mention mention_from_json(const Json& j) {
  return guarded("mention", [&] {
    Mention m;
    m.entity_id = j.at("entity").get<std::string>();
    m.entity_type = j.at("type").get<std::string>();
    m.doc_id = j.at("doc").get<std::string>();
    m.unit_index = j.at("unit").get<int>();
    if (!position_from_name(j.at("position").get<std::string>(),
                            &m.position)) {
      bad("unknown mention position");
    }
    if (!span_kind_from_name(j.at("span").get<std::string>(), &m.span_kind)) {
      bad("unknown span kind");
    }
    m.block = j.at("block").get<int>();
    m.context = j.at("context").get<bool>();
    return m;
  });
}

// ---------------------------------------------------------------------------
// Catalog and index

Json to_json(const FeatureCatalog& catalog) {
  Json out = Json::array();
  for (const FeatureEntry& e : catalog.entries()) {
    out.push_back({{"k", e.k},
                   {"name", e.name},
                   {"role_a", e.role_a},
                   {"role_b", e.role_b},
                   {"weight", e.weight},
                   {"kind", e.kind == FeatureKind::kAbsolute ? "absolute"
                                                             : "relational"}});
  }
  return out;
}

FeatureCatalog catalog_from_json(const Json& j) {
  auto entries = guarded("feature catalog", [&] {
    if (!j.is_array()) bad("feature catalog must be a list");
    std::vector<FeatureEntry> entries;
    for (const Json& je : j) {
      FeatureEntry e;
      e.k = je.at("k").get<int>();
      e.name = je.at("name").get<std::string>();
      e.role_a = je.at("role_a").get<std::string>();
      e.role_b = je.at("role_b").get<std::string>();
      e.weight = je.at("weight").get<double>();
      const std::string kind = je.value("kind", "relational");
      if (kind == "absolute") {
        e.kind = FeatureKind::kAbsolute;
      } else if (kind != "relational") {
        bad("unknown feature kind '" + kind + "'");
      }
      entries.push_back(std::move(e));
    }
    return entries;
  });
  return FeatureCatalog(std::move(entries));
}

Json to_json(const CorpusIndex& index) {
  Json units = Json::array();
  for (const Posting& p : index.postings()) {
    units.push_back(
        {{"doc", p.doc}, {"unit", p.unit}, {"k", p.k}, {"A", p.a}, {"B", p.b}});
  }
  Json entity_units = Json::object();
  for (const auto& [x, refs] : index.entity_units()) {
    Json list = Json::array();
    for (const UnitRef& r : refs) list.push_back({r.doc, r.unit});
    entity_units[x] = std::move(list);
  }
  return {{"feature_count", index.feature_count()},
          {"unit_count", index.unit_count()},
          {"totals", index.totals()},
          {"feature_totals", index.feature_totals()},
          {"direct", index.direct_counts()},
          {"marked", index.marked_counts()},
          {"entity_units", std::move(entity_units)},
          {"units", std::move(units)}};
}

CorpusIndex index_from_json(const Json& j) {
  return guarded("index", [&] {
    CorpusIndex index(j.at("feature_count").get<int>(),
                      j.at("unit_count").get<int64_t>());
    std::map<std::string, std::vector<UnitRef>> entity_units;
    if (j.contains("entity_units")) {
      for (const auto& [x, list] : j["entity_units"].items()) {
        auto& refs = entity_units[x];
        for (const Json& r : list) {
          refs.push_back({r.at(0).get<std::string>(), r.at(1).get<int>()});
        }
      }
    }
    auto counts = [&](const char* key) {
      return j.contains(key) ? j[key].get<std::map<std::string, int64_t>>()
                             : std::map<std::string, int64_t>{};
    };
    index.set_totals(
        j.at("totals").get<std::map<std::string, int64_t>>(),
        j.at("feature_totals")
            .get<std::map<std::string, std::vector<int64_t>>>(),
        counts("direct"), counts("marked"), std::move(entity_units));
    for (const Json& u : j.at("units")) {
      index.add_posting(Posting{u.at("doc").get<std::string>(),
                                u.at("unit").get<int>(), u.at("k").get<int>(),
                                u.at("A").get<std::vector<std::string>>(),
                                u.at("B").get<std::vector<std::string>>()});
    }
    index.finalize();
    return index;
  });
}

// ---------------------------------------------------------------------------
// DSM records, stats, graphs

Json to_json(const DsmRecord& r) {
  return {{"x", r.x}, {"y", r.y}, {"rho_k", r.rho_k}, {"rho_agg", r.rho_agg}};
}

DsmRecord dsm_record_from_json(const Json& j) {
  return guarded("dsm record", [&] {
    return DsmRecord{j.at("x").get<std::string>(), j.at("y").get<std::string>(),
                     j.at("rho_k").get<std::vector<double>>(),
                     j.at("rho_agg").get<double>()};
  });
}

Json to_json(const DatasetStats& s) {
  return {{"documents", s.documents},
          {"nodes", s.nodes},
          {"node_types", s.node_types},
          {"relation_types", s.relation_types}};
}

Json to_json(const TypedGraph& g) {
  Json nodes = Json::array();
  for (int v = 0; v < g.num_nodes(); ++v) {
    nodes.push_back({g.node_ids[v], g.type_names[g.node_type[v]]});
  }
  Json edges = Json::array();
  for (const Edge& e : g.edges) {
    Json je = {{"s", e.subject},
               {"r", e.relation},
               {"o", e.object},
               {"split", split_name(e.split)}};
    if (e.dsm) je["dsm"] = {{"rho_k", e.dsm->rho_k}, {"rho_agg", e.dsm->rho_agg}};
    if (e.dsm_reverse) {
      je["dsm_reverse"] = {{"rho_k", e.dsm_reverse->rho_k},
                           {"rho_agg", e.dsm_reverse->rho_agg}};
    }
    edges.push_back(std::move(je));
  }
  return {{"nodes", std::move(nodes)},
          {"relations", g.relations},
          {"self_relation", g.self_relation},
          {"edges", std::move(edges)}};
}

TypedGraph graph_from_json(const Json& j) {
  return guarded("graph", [&] {
    TypedGraph g;
    for (const Json& n : j.at("nodes")) {
      g.add_node(n.at(0).get<std::string>(), n.at(1).get<std::string>());
    }
    for (const Json& r : j.at("relations")) {
      g.add_relation(r.get<std::string>());
    }
    g.self_relation = j.at("self_relation").get<int>();
    if (g.self_relation >= g.num_relations()) bad("self_relation out of range");
    for (const Json& je : j.at("edges")) {
      Edge e;
      e.subject = je.at("s").get<int>();
      e.relation = je.at("r").get<int>();
      e.object = je.at("o").get<int>();
      if (e.subject < 0 || e.subject >= g.num_nodes() || e.object < 0 ||
          e.object >= g.num_nodes() || e.relation < 0 ||
          e.relation >= g.num_relations()) {
        bad("edge references unknown node or relation");
      }
      e.split = split_from_name(je.at("split").get<std::string>());
      const std::string& s = g.node_ids[e.subject];
      const std::string& o = g.node_ids[e.object];
      if (je.contains("dsm")) {
        e.dsm = DsmRecord{s, o, je["dsm"].at("rho_k").get<std::vector<double>>(),
                          je["dsm"].at("rho_agg").get<double>()};
      }
      if (je.contains("dsm_reverse")) {
        const Json& jr = je["dsm_reverse"];
        e.dsm_reverse = DsmRecord{o, s, jr.at("rho_k").get<std::vector<double>>(),
                                  jr.at("rho_agg").get<double>()};
      }
      g.edges.push_back(std::move(e));
    }
    return g;
  });
}

// ---------------------------------------------------------------------------
// Model checkpoints and configs

Json to_json(const Tensor& t) {
  return {{"rows", t.rows()}, {"cols", t.cols()}, {"data", t.data()}};
}

Tensor tensor_from_json(const Json& j) {
  return guarded("tensor", [&] {
    Tensor t(j.at("rows").get<int>(), j.at("cols").get<int>());
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != t.data().size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "tensor data length does not match its shape");
    }
    t.data() = std::move(data);
    return t;
  });
}

Json to_json(const ModelParams& p) {
  Json layers = Json::array();
  for (const LayerParams& l : p.layers) {
    Json rel = Json::array();
    for (const Tensor& t : l.relations) rel.push_back(to_json(t));
    layers.push_back({{"self", to_json(l.self)}, {"relations", std::move(rel)}});
  }
  Json out = {{"variant", variant_name(p.variant.variant)},
              {"lambda", p.variant.lambda},
              {"node_bias", p.variant.node_bias},
              {"one_hot_features", p.one_hot_features}};
  if (!p.one_hot_features) out["features"] = to_json(p.features);
  out["layers"] = std::move(layers);
  out["diagonals"] = to_json(p.diagonals);
  out["class_relations"] = p.class_relations;
  return out;
}

ModelParams params_from_json(const Json& j) {
  return guarded("checkpoint", [&] {
    ModelParams p;
    if (!variant_from_name(j.at("variant").get<std::string>(),
                           &p.variant.variant)) {
      bad("unknown variant");
    }
    p.variant.lambda = j.at("lambda").get<double>();
    p.variant.node_bias = j.at("node_bias").get<bool>();
    p.one_hot_features = j.at("one_hot_features").get<bool>();
    if (!p.one_hot_features) p.features = tensor_from_json(j.at("features"));
    for (const Json& jl : j.at("layers")) {
      LayerParams l;
      l.self = tensor_from_json(jl.at("self"));
      for (const Json& jr : jl.at("relations")) {
        l.relations.push_back(tensor_from_json(jr));
      }
      p.layers.push_back(std::move(l));
    }
    p.diagonals = tensor_from_json(j.at("diagonals"));
    p.class_relations = j.at("class_relations").get<std::vector<int>>();
    return p;
  });
}

Json to_json(const TrainConfig& c) {
  return {{"variant", variant_name(c.variant.variant)},
          {"lambda", c.variant.lambda},
          {"node_bias", c.variant.node_bias},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"hidden_dim", c.hidden_dim},
          {"num_layers", c.num_layers},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const Json& j, const TrainConfig& defaults) {
  return guarded("train config", [&] {
    TrainConfig c = defaults;
    if (j.contains("variant") &&
        !variant_from_name(j["variant"].get<std::string>(), &c.variant.variant)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown variant '" + j["variant"].get<std::string>() + "'");
    }
    c.variant.lambda = j.value("lambda", c.variant.lambda);
    c.variant.node_bias = j.value("node_bias", c.variant.node_bias);
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.num_layers = j.value("num_layers", c.num_layers);
    c.seed = j.value("seed", c.seed);
    return c;
  });
}

// ---------------------------------------------------------------------------
// Text helpers

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    bad(e.what());
  }
}

Json load_json(const std::string& path) {
  try {
    return parse_json(read_file(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParseError) throw;
    bad(path + ": " + e.what());
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

std::vector<Json> parse_jsonl(std::string_view text) {
  std::vector<Json> out;
  int line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kParseError, e.what(), line_no);
    }
  }
  return out;
}

std::string dump_jsonl(const std::vector<Json>& values) {
  std::string out;
  for (const Json& v : values) out += v.dump() + "\n";
  return out;
}

}  // namespace dsm
