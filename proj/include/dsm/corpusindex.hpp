#pragma once

// Structure-aware inverted index. For every paragraph unit and every
// relational feature present in it, the index records the set A of entities
// in the higher-hierarchy role and the set B in the lower-hierarchy role.
// Occurrences inside one unit count once (indicator semantics).

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dsm/docstruct.hpp"

namespace dsm {

enum class FeatureKind { kRelational, kAbsolute };

// Role names understood by build_index:
//   preceding_text, bullet_item, title, section_heading, infobox_value,
//   footnote                    exactly that mention position
//   body                        any position except Title
//   under_heading               any position except Title / SectionHeading
//   infobox_key_or_title        InfoboxKey or Title
//   unit_body                   PrecedingText, BulletItem or BodyText
//   marked                      bracketed/emphasized/footnote (absolute only)
struct FeatureEntry {
  int k = 0;
  std::string name;
  std::string role_a;
  std::string role_b;
  double weight = 1.0;
  FeatureKind kind = FeatureKind::kRelational;

  bool operator==(const FeatureEntry&) const = default;
};

class FeatureCatalog {
 public:
  FeatureCatalog() = default;
  // Relational entries first (k = 1..Kr), then at most one absolute entry
  // (k = Kr + 1). Throws Error{kUnknownFeature} for unknown feature or role
  // names and Error{kInvalidArgument} for any other invariant violation.
  explicit FeatureCatalog(std::vector<FeatureEntry> entries);

  // bullets, footnote, title, section_heading, infobox (weights 1) plus the
  // absolute slot (weight `absolute_weight`) when `with_absolute` is set.
  static FeatureCatalog standard(bool with_absolute = true,
                                 double absolute_weight = 0.0);

  const std::vector<FeatureEntry>& entries() const { return entries_; }
  int relational_count() const { return relational_count_; }
  const FeatureEntry* absolute() const;
  const FeatureEntry& relational(int k) const { return entries_[k - 1]; }

  FeatureCatalog with_weights(std::span<const double> weights) const;
  FeatureCatalog scaled(double factor) const;

  bool operator==(const FeatureCatalog&) const = default;

 private:
  std::vector<FeatureEntry> entries_;
  int relational_count_ = 0;
};

struct Posting {
  std::string doc;
  int unit = 0;
  int k = 0;
  std::vector<std::string> a;  // sorted, unique
  std::vector<std::string> b;  // sorted, unique

  bool operator==(const Posting&) const = default;
};

struct UnitRef {
  std::string doc;
  int unit = 0;

  auto operator<=>(const UnitRef&) const = default;
};

class CorpusIndex {
 public:
  CorpusIndex() = default;
  CorpusIndex(int feature_count, int64_t unit_count);

  int feature_count() const { return feature_count_; }
  int64_t unit_count() const { return unit_count_; }

  // n_x: every mention, enrichment context included.
  const std::map<std::string, int64_t>& totals() const { return totals_; }
  // n^{k,x} for k = 1..Kr, stored at index k-1.
  const std::map<std::string, std::vector<int64_t>>& feature_totals() const {
    return feature_totals_;
  }
  const std::vector<Posting>& postings() const { return postings_; }
  // Mentions found in the unit's own blocks, and the subset that is
  // bracketed, emphasized or in a footnote.
  const std::map<std::string, int64_t>& direct_counts() const {
    return direct_;
  }
  const std::map<std::string, int64_t>& marked_counts() const {
    return marked_;
  }
  const std::map<std::string, std::vector<UnitRef>>& entity_units() const {
    return entity_units_;
  }

  // Posting ids (into postings()) where x holds the a/b role of feature k.
  std::span<const int> a_postings(const std::string& x, int k) const;
  std::span<const int> b_postings(const std::string& x, int k) const;

  // Construction; call finalize() once all data is in.
  void add_mention(const Mention& m);
  void add_feature_hit(const std::string& x, int k);
  void add_posting(Posting p);
  void set_totals(std::map<std::string, int64_t> totals,
                  std::map<std::string, std::vector<int64_t>> feature_totals,
                  std::map<std::string, int64_t> direct,
                  std::map<std::string, int64_t> marked,
                  std::map<std::string, std::vector<UnitRef>> entity_units);
  void finalize();

  bool operator==(const CorpusIndex& o) const {
    return feature_count_ == o.feature_count_ &&
           unit_count_ == o.unit_count_ && totals_ == o.totals_ &&
           feature_totals_ == o.feature_totals_ && postings_ == o.postings_ &&
           direct_ == o.direct_ && marked_ == o.marked_ &&
           entity_units_ == o.entity_units_;
  }

 private:
  int feature_count_ = 0;
  int64_t unit_count_ = 0;
  std::map<std::string, int64_t> totals_;
  std::map<std::string, std::vector<int64_t>> feature_totals_;
  std::map<std::string, int64_t> direct_;
  std::map<std::string, int64_t> marked_;
  std::map<std::string, std::vector<UnitRef>> entity_units_;
  std::vector<Posting> postings_;

  // [k-1][entity] -> sorted posting ids
  std::vector<std::unordered_map<std::string, std::vector<int>>> a_lookup_;
  std::vector<std::unordered_map<std::string, std::vector<int>>> b_lookup_;
};

// Mentions must reference units of `docs` as produced by split_units().
// Throws Error{kUnknownFeature} if a mention position is covered by no role
// of the catalog, Error{kInvalidArgument} for dangling mentions or duplicate
// document ids. The result does not depend on the order of `docs`.
CorpusIndex build_index(std::span<const Document> docs,
                        std::span<const Mention> mentions,
                        const FeatureCatalog& catalog);

// Marks documents so that each unit's heading path (title and enclosing
// headings) and, for footnotes, the annotated paragraph join the unit's
// searchable text. Blocks are left untouched.
std::vector<Document> enrich_units(std::span<const Document> docs);

struct EntityCounts {
  int64_t total = 0;
  std::vector<int64_t> per_feature;
};

EntityCounts count(const CorpusIndex& index, const std::string& x);

struct PairCounts {
  int64_t numerator = 0;
  int64_t denominator = 0;

  bool operator==(const PairCounts&) const = default;
};

// numerator: units where x is in A and y in B for feature k; denominator:
// units where x is in A. Out-of-range k yields zeros.
PairCounts pair_counts(const CorpusIndex& index, const std::string& x,
                       const std::string& y, int k);

// True if the role name is known; `p` is tested against its position class.
bool role_known(std::string_view role);
bool role_covers(std::string_view role, Position p);

}  // namespace dsm
