#pragma once

// JSON encodings of the pipeline's persisted artifacts. Every decoder throws
// Error{kParseError} for malformed input.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dsm/corpusindex.hpp"
#include "dsm/docstruct.hpp"
#include "dsm/dsmcore.hpp"
#include "dsm/graphset.hpp"
#include "dsm/rgcn.hpp"

namespace dsm {

using Json = nlohmann::ordered_json;

Json to_json(const Document& doc);
Document document_from_json(const Json& j);

Json to_json(const Mention& m);
Mention mention_from_json(const Json& j);

Json to_json(const FeatureCatalog& catalog);
FeatureCatalog catalog_from_json(const Json& j);

// {totals, feature_totals, units:[{doc, unit, k, A, B}], ...}
Json to_json(const CorpusIndex& index);
CorpusIndex index_from_json(const Json& j);

Json to_json(const DsmRecord& r);
DsmRecord dsm_record_from_json(const Json& j);

Json to_json(const DatasetStats& s);

// Graph with splits and attached DSM records.
Json to_json(const TypedGraph& g);
TypedGraph graph_from_json(const Json& j);

// Shapes plus row-major arrays.
Json to_json(const Tensor& t);
Tensor tensor_from_json(const Json& j);
Json to_json(const ModelParams& p);
ModelParams params_from_json(const Json& j);

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j, const TrainConfig& defaults);

Json parse_json(std::string_view text);
Json load_json(const std::string& path);
// Pretty-printed with a trailing newline; doubles keep full precision.
std::string dump_json(const Json& j);

// One compact JSON value per line.
std::vector<Json> parse_jsonl(std::string_view text);
std::string dump_jsonl(const std::vector<Json>& values);

}  // namespace dsm
