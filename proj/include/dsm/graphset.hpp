#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dsm/dsmcore.hpp"

namespace dsm {

enum class Split { kTrain, kVal, kTest };

std::string_view split_name(Split s);

struct Edge {
  int subject = 0;
  int relation = 0;
  int object = 0;
  Split split = Split::kTrain;
  // (subject, object) and (object, subject) records once attach_dsm() ran.
  std::optional<DsmRecord> dsm;
  std::optional<DsmRecord> dsm_reverse;

  double rho() const { return dsm ? dsm->rho_agg : 0.0; }
  double rho_reverse() const { return dsm_reverse ? dsm_reverse->rho_agg : 0.0; }

  bool operator==(const Edge&) const = default;
};

inline constexpr std::string_view kSelfRelationName = "_self";

struct TypedGraph {
  std::vector<std::string> node_ids;
  std::vector<int> node_type;             // per node, into type_names
  std::vector<std::string> type_names;
  std::vector<std::string> relations;     // relation id -> name
  int self_relation = -1;
  std::vector<Edge> edges;

  int find_node(std::string_view id) const;  // -1 if absent
  int find_relation(std::string_view name) const;
  int num_nodes() const { return static_cast<int>(node_ids.size()); }
  int num_relations() const { return static_cast<int>(relations.size()); }

  // Returns the node index, adding the node if needed. Throws
  // Error{kTypeConflict} if the id is already bound to another type.
  int add_node(const std::string& id, const std::string& type);
  int add_relation(const std::string& name);

  bool operator==(const TypedGraph& o) const {
    return node_ids == o.node_ids && node_type == o.node_type &&
           type_names == o.type_names && relations == o.relations &&
           self_relation == o.self_relation && edges == o.edges;
  }

 private:
  std::unordered_map<std::string, int> node_index_;
  std::unordered_map<std::string, int> relation_index_;
};

struct DatasetStats {
  int64_t documents = 0;
  int64_t nodes = 0;
  int64_t node_types = 0;
  int64_t relation_types = 0;

  bool operator==(const DatasetStats&) const = default;
};

// `subject<TAB>relation<TAB>object<TAB>subject_type<TAB>object_type`;
// `#` lines and blank lines are ignored. Duplicate triples collapse; ids are
// assigned by first appearance. Throws Error{kParseError} / {kTypeConflict}.
TypedGraph parse_triples(std::string_view text);
TypedGraph load_triples(const std::string& path);
// Canonical TSV of the non-self-loop edges in edge order.
std::string serialize_triples(const TypedGraph& graph);

// Appends the shared self-loop relation (once) and gives every node without
// incident edges a (v, self, v) edge.
TypedGraph add_self_loops(const TypedGraph& graph);

using SplitFractions = std::array<double, 3>;  // train, val, test

// Stratified per relation: a class of n edges receives floor(n * val) val
// and floor(n * test) test edges (at least one each when n >= 3), the
// remainder goes to train. Members are shuffled in canonical (subject,
// relation, object) order by a seeded generator. Self-loops stay in train.
// Throws Error{kDegenerateSplit} if any split ends up empty and
// Error{kInvalidArgument} for fractions that are not positive or do not sum
// to one.
TypedGraph split_edges(const TypedGraph& graph, const SplitFractions& fractions,
                       uint64_t seed);

// Missing pairs receive zero records; self-loops carry zero records.
TypedGraph attach_dsm(const TypedGraph& graph, const DsmTable& records);

DatasetStats stats(const TypedGraph& graph, int64_t documents);

}  // namespace dsm
