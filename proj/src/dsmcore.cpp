#include "dsm/dsmcore.hpp"

#include <algorithm>

#include "dsm/error.hpp"
#include "dsm/graphset.hpp"

namespace dsm {

double rho_k(const CorpusIndex& index, const std::string& x,
             const std::string& y, int k) {
  PairCounts pc = pair_counts(index, x, y, k);
  if (pc.denominator == 0) return 0.0;
  return static_cast<double>(pc.numerator) /
         static_cast<double>(pc.denominator);
}

double importance(int64_t n_x, int64_t n_kx) {
  if (n_x < 0 || n_kx < 0 || n_kx > n_x) {
    throw Error(ErrorCode::kInvalidCounts,
                "need 0 <= n_kx <= n_x, got n_x=" + std::to_string(n_x) +
                    " n_kx=" + std::to_string(n_kx));
  }
  return static_cast<double>(n_kx) /
         static_cast<double>(std::max<int64_t>(n_x, 1));
}

DsmRecord rho_aggregate(const CorpusIndex& index, const FeatureCatalog& catalog,
                        const std::string& x, const std::string& y) {
  DsmRecord rec{x, y, {}, 0.0};
  EntityCounts cx = count(index, x);
  const int kr = catalog.relational_count();
  rec.rho_k.reserve(kr + 1);
  for (int k = 1; k <= kr; ++k) {
    double rho = rho_k(index, x, y, k);
    rec.rho_k.push_back(rho);
    if (rho == 0.0) continue;
    const int64_t n_kx = k <= static_cast<int>(cx.per_feature.size())
                             ? cx.per_feature[k - 1]
                             : 0;
    rec.rho_agg += catalog.relational(k).weight * importance(cx.total, n_kx) *
                   rho;
  }
  if (const FeatureEntry* abs = catalog.absolute()) {
    double flag = absolute_flag(index, y);
    rec.rho_k.push_back(flag);
    rec.rho_agg += abs->weight * flag;
  }
  return rec;
}

double absolute_flag(std::span<const Mention> mentions) {
  int64_t direct = 0;
  int64_t marked = 0;
  for (const Mention& m : mentions) {
    if (m.context) continue;
    ++direct;
    if (m.span_kind != SpanKind::kPlain || m.position == Position::kFootnote) {
      ++marked;
    }
  }
  if (direct == 0) return 0.0;
  return static_cast<double>(marked) / static_cast<double>(direct);
}

double absolute_flag(const CorpusIndex& index, const std::string& x) {
  auto d = index.direct_counts().find(x);
  if (d == index.direct_counts().end() || d->second == 0) return 0.0;
  auto m = index.marked_counts().find(x);
  int64_t marked = m == index.marked_counts().end() ? 0 : m->second;
  return static_cast<double>(marked) / static_cast<double>(d->second);
}

DsmTable dsm_for_graph(const CorpusIndex& index, const FeatureCatalog& catalog,
                       const TypedGraph& graph) {
  DsmTable table;
  for (const Edge& e : graph.edges) {
    if (e.relation == graph.self_relation) continue;
    const std::string& s = graph.node_ids[e.subject];
    const std::string& o = graph.node_ids[e.object];
    for (const PairKey& key : {PairKey{s, o}, PairKey{o, s}}) {
      if (!table.contains(key)) {
        table.emplace(key, rho_aggregate(index, catalog, key.first,
                                         key.second));
      }
    }
  }
  return table;
}

}  // namespace dsm
