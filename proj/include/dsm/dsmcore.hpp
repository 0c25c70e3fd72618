#pragma once

// Document Structure Measure values over a built CorpusIndex.
//
//   rho^k(x, y) = #units{x in A_k, y in B_k} / #units{x in A_k}   (0 if 0/0)
//   f^k(n_x, n^{k,x}) = n^{k,x} / max(n_x, 1)
//   rho(x, y) = sum_k w^k f^k(n_x, n^{k,x}) rho^k(x, y)
//
// When the catalog carries an absolute entry, its slot holds
// absolute_flag(y) and contributes w_abs * absolute_flag(y) to the sum.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsm/corpusindex.hpp"

namespace dsm {

struct TypedGraph;

struct DsmRecord {
  std::string x;
  std::string y;
  std::vector<double> rho_k;
  double rho_agg = 0.0;

  bool operator==(const DsmRecord&) const = default;
};

using PairKey = std::pair<std::string, std::string>;
using DsmTable = std::map<PairKey, DsmRecord>;

double rho_k(const CorpusIndex& index, const std::string& x,
             const std::string& y, int k);

// Throws Error{kInvalidCounts} unless 0 <= n_kx <= n_x.
double importance(int64_t n_x, int64_t n_kx);

DsmRecord rho_aggregate(const CorpusIndex& index, const FeatureCatalog& catalog,
                        const std::string& x, const std::string& y);

// Share of direct (non-context) mentions that are bracketed, emphasized or
// inside a footnote.
double absolute_flag(std::span<const Mention> mentions);
double absolute_flag(const CorpusIndex& index, const std::string& x);

// Records for (s, o) and (o, s) of every non-self-loop edge.
DsmTable dsm_for_graph(const CorpusIndex& index, const FeatureCatalog& catalog,
                       const TypedGraph& graph);

}  // namespace dsm
