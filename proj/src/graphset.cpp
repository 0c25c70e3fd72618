#include "dsm/graphset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "dsm/error.hpp"
#include "dsm/random.hpp"
#include "text_util.hpp"

namespace dsm {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "";
}

int TypedGraph::find_node(std::string_view id) const {
  auto it = node_index_.find(std::string(id));
  return it == node_index_.end() ? -1 : it->second;
}

int TypedGraph::find_relation(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  return it == relation_index_.end() ? -1 : it->second;
}

int TypedGraph::add_node(const std::string& id, const std::string& type) {
  auto t = std::find(type_names.begin(), type_names.end(), type);
  int type_id = static_cast<int>(t - type_names.begin());
  if (auto it = node_index_.find(id); it != node_index_.end()) {
    if (t == type_names.end() || node_type[it->second] != type_id) {
      throw Error(ErrorCode::kTypeConflict,
                  "node " + id + " has type " +
                      type_names[node_type[it->second]] + ", not " + type);
    }
    return it->second;
  }
  if (t == type_names.end()) type_names.push_back(type);
  int idx = num_nodes();
  node_ids.push_back(id);
  node_type.push_back(type_id);
  node_index_.emplace(id, idx);
  return idx;
}

int TypedGraph::add_relation(const std::string& name) {
  auto [it, inserted] = relation_index_.emplace(name, num_relations());
  if (inserted) relations.push_back(name);
  return it->second;
}

TypedGraph parse_triples(std::string_view text) {
  TypedGraph g;
  std::set<std::tuple<int, int, int>> seen;
  int line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split(raw, '\t');
    if (fields.size() != 5) {
      throw Error(ErrorCode::kParseError,
                  "expected 5 tab-separated fields, got " +
                      std::to_string(fields.size()),
                  line_no);
    }
    std::array<std::string, 5> f;
    for (size_t i = 0; i < 5; ++i) {
      f[i] = std::string(trim(fields[i]));
      if (f[i].empty()) {
        throw Error(ErrorCode::kParseError,
                    "field " + std::to_string(i + 1) + " is empty", line_no);
      }
    }
    int s;
    int o;
    try {
      s = g.add_node(f[0], f[3]);
      o = g.add_node(f[2], f[4]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kTypeConflict, e.what(), line_no);
    }
    int r = g.add_relation(f[1]);
    if (seen.emplace(s, r, o).second) {
      g.edges.push_back(Edge{.subject = s, .relation = r, .object = o});
    }
  }
  return g;
}

TypedGraph load_triples(const std::string& path) {
  return parse_triples(read_file(path));
}

std::string serialize_triples(const TypedGraph& graph) {
  std::string out;
  for (const Edge& e : graph.edges) {
    if (e.relation == graph.self_relation) continue;
    out += graph.node_ids[e.subject] + "\t" + graph.relations[e.relation] +
           "\t" + graph.node_ids[e.object] + "\t" +
           graph.type_names[graph.node_type[e.subject]] + "\t" +
           graph.type_names[graph.node_type[e.object]] + "\n";
  }
  return out;
}

TypedGraph add_self_loops(const TypedGraph& graph) {
  TypedGraph g = graph;
  if (g.self_relation < 0) {
    g.self_relation = g.add_relation(std::string(kSelfRelationName));
  }
  std::vector<int> degree(g.num_nodes(), 0);
  for (const Edge& e : g.edges) {
    ++degree[e.subject];
    ++degree[e.object];
  }
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (degree[v] == 0) {
      g.edges.push_back(
          Edge{.subject = v, .relation = g.self_relation, .object = v});
    }
  }
  return g;
}

TypedGraph split_edges(const TypedGraph& graph, const SplitFractions& fractions,
                       uint64_t seed) {
  double sum = 0;
  for (double f : fractions) {
    if (!(f > 0) || !std::isfinite(f)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "split fractions must be positive");
    }
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split fractions must sum to 1");
  }

  TypedGraph g = graph;
  std::map<int, std::vector<int>> by_relation;
  for (size_t i = 0; i < g.edges.size(); ++i) {
    Edge& e = g.edges[i];
    e.split = Split::kTrain;
    if (e.relation != g.self_relation) {
      by_relation[e.relation].push_back(static_cast<int>(i));
    }
  }

  std::array<int64_t, 3> sizes{0, 0, 0};
  for (auto& [relation, members] : by_relation) {
    std::sort(members.begin(), members.end(), [&](int l, int r) {
      const Edge& a = g.edges[l];
      const Edge& b = g.edges[r];
      return std::tie(g.node_ids[a.subject], g.node_ids[a.object]) <
             std::tie(g.node_ids[b.subject], g.node_ids[b.object]);
    });
    Rng rng(mix_seed(seed, static_cast<uint64_t>(relation)));
    rng.shuffle(members);
    const auto n = static_cast<int64_t>(members.size());
    auto n_val = static_cast<int64_t>(std::floor(n * fractions[1] + 1e-9));
    auto n_test = static_cast<int64_t>(std::floor(n * fractions[2] + 1e-9));
    if (n >= 3) {
      n_val = std::max<int64_t>(n_val, 1);
      n_test = std::max<int64_t>(n_test, 1);
    }
    for (int64_t i = 0; i < n; ++i) {
      Split s = i < n_val            ? Split::kVal
                : i < n_val + n_test ? Split::kTest
                                     : Split::kTrain;
      g.edges[members[i]].split = s;
      ++sizes[static_cast<int>(s)];
    }
  }
  for (int s = 0; s < 3; ++s) {
    if (sizes[s] == 0) {
      throw Error(ErrorCode::kDegenerateSplit,
                  std::string(split_name(static_cast<Split>(s))) +
                      " split would be empty");
    }
  }
  return g;
}

TypedGraph attach_dsm(const TypedGraph& graph, const DsmTable& records) {
  TypedGraph g = graph;
  for (Edge& e : g.edges) {
    const std::string& s = g.node_ids[e.subject];
    const std::string& o = g.node_ids[e.object];
    e.dsm = DsmRecord{s, o, {}, 0.0};
    e.dsm_reverse = DsmRecord{o, s, {}, 0.0};
    if (e.relation == g.self_relation) continue;
    if (auto it = records.find({s, o}); it != records.end()) e.dsm = it->second;
    if (auto it = records.find({o, s}); it != records.end()) {
      e.dsm_reverse = it->second;
    }
  }
  return g;
}

DatasetStats stats(const TypedGraph& graph, int64_t documents) {
  std::set<int> types(graph.node_type.begin(), graph.node_type.end());
  return DatasetStats{documents, graph.num_nodes(),
                      static_cast<int64_t>(types.size()),
                      graph.num_relations()};
}

}  // namespace dsm
