#include "dsm/corpusindex.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dsm/error.hpp"

namespace dsm {

// ---------------------------------------------------------------------------
// Roles

namespace {

constexpr std::string_view kRoles[] = {
    "preceding_text", "bullet_item",  "title",         "section_heading",
    "infobox_value",  "footnote",     "body",          "under_heading",
    "infobox_key_or_title",           "unit_body",     "marked",
};

}  // namespace

bool role_known(std::string_view role) {
  return std::find(std::begin(kRoles), std::end(kRoles), role) !=
         std::end(kRoles);
}

bool role_covers(std::string_view role, Position p) {
  using P = Position;
  if (role == "preceding_text") return p == P::kPrecedingText;
  if (role == "bullet_item") return p == P::kBulletItem;
  if (role == "title") return p == P::kTitle;
  if (role == "section_heading") return p == P::kSectionHeading;
  if (role == "infobox_value") return p == P::kInfoboxValue;
  if (role == "footnote") return p == P::kFootnote;
  if (role == "body") return p != P::kTitle;
  if (role == "under_heading") {
    return p != P::kTitle && p != P::kSectionHeading;
  }
  if (role == "infobox_key_or_title") {
    return p == P::kInfoboxKey || p == P::kTitle;
  }
  if (role == "unit_body") {
    return p == P::kPrecedingText || p == P::kBulletItem || p == P::kBodyText;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Catalog

FeatureCatalog::FeatureCatalog(std::vector<FeatureEntry> entries)
    : entries_(std::move(entries)) {
  std::set<std::string> names;
  bool seen_absolute = false;
  for (size_t i = 0; i < entries_.size(); ++i) {
    const FeatureEntry& e = entries_[i];
    if (e.k != static_cast<int>(i) + 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "feature indexes must be dense from 1 (entry '" + e.name +
                      "' has k=" + std::to_string(e.k) + ")");
    }
    if (!names.insert(e.name).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate feature name '" + e.name + "'");
    }
    if (!std::isfinite(e.weight) || e.weight < 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "feature '" + e.name + "' weight must be finite and >= 0");
    }
    if (e.kind == FeatureKind::kAbsolute) {
      if (seen_absolute) {
        throw Error(ErrorCode::kInvalidArgument,
                    "at most one absolute feature is allowed");
      }
      seen_absolute = true;
      continue;
    }
    if (seen_absolute) {
      throw Error(ErrorCode::kInvalidArgument,
                  "relational features must precede the absolute feature");
    }
    Feature f;
    if (!feature_from_name(e.name, &f)) {
      throw Error(ErrorCode::kUnknownFeature,
                  "unknown document feature '" + e.name + "'");
    }
    for (const std::string& role : {e.role_a, e.role_b}) {
      if (!role_known(role) || role == "marked") {
        throw Error(ErrorCode::kUnknownFeature,
                    "feature '" + e.name + "' has unknown role '" + role + "'");
      }
    }
    ++relational_count_;
  }
}

FeatureCatalog FeatureCatalog::standard(bool with_absolute,
                                        double absolute_weight) {
  using K = FeatureKind;
  std::vector<FeatureEntry> entries = {
      {1, "bullets", "preceding_text", "bullet_item", 1.0, K::kRelational},
      {2, "footnote", "unit_body", "footnote", 1.0, K::kRelational},
      {3, "title", "title", "body", 1.0, K::kRelational},
      {4, "section_heading", "section_heading", "under_heading", 1.0,
       K::kRelational},
      {5, "infobox", "infobox_key_or_title", "infobox_value", 1.0,
       K::kRelational},
  };
  if (with_absolute) {
    entries.push_back({6, "absolute", "marked", "marked", absolute_weight,
                       K::kAbsolute});
  }
  return FeatureCatalog(std::move(entries));
}

const FeatureEntry* FeatureCatalog::absolute() const {
  if (!entries_.empty() && entries_.back().kind == FeatureKind::kAbsolute) {
    return &entries_.back();
  }
  return nullptr;
}

FeatureCatalog FeatureCatalog::with_weights(
    std::span<const double> weights) const {
  if (weights.size() != entries_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "expected " + std::to_string(entries_.size()) + " weights");
  }
  std::vector<FeatureEntry> e = entries_;
  for (size_t i = 0; i < e.size(); ++i) e[i].weight = weights[i];
  return FeatureCatalog(std::move(e));
}

FeatureCatalog FeatureCatalog::scaled(double factor) const {
  std::vector<double> w;
  for (const FeatureEntry& e : entries_) w.push_back(e.weight * factor);
  return with_weights(w);
}

// ---------------------------------------------------------------------------
// Index container

CorpusIndex::CorpusIndex(int feature_count, int64_t unit_count)
    : feature_count_(feature_count), unit_count_(unit_count) {}

std::span<const int> CorpusIndex::a_postings(const std::string& x,
                                             int k) const {
  if (k < 1 || k > feature_count_) return {};
  const auto& m = a_lookup_[k - 1];
  auto it = m.find(x);
  if (it == m.end()) return {};
  return it->second;
}

std::span<const int> CorpusIndex::b_postings(const std::string& x,
                                             int k) const {
  if (k < 1 || k > feature_count_) return {};
  const auto& m = b_lookup_[k - 1];
  auto it = m.find(x);
  if (it == m.end()) return {};
  return it->second;
}

void CorpusIndex::add_mention(const Mention& m) {
  ++totals_[m.entity_id];
  if (!m.context) {
    ++direct_[m.entity_id];
    if (m.span_kind != SpanKind::kPlain || m.position == Position::kFootnote) {
      ++marked_[m.entity_id];
    }
  }
  auto& units = entity_units_[m.entity_id];
  UnitRef ref{m.doc_id, m.unit_index};
  if (units.empty() || units.back() != ref) units.push_back(ref);
}

void CorpusIndex::add_feature_hit(const std::string& x, int k) {
  auto& v = feature_totals_[x];
  v.resize(feature_count_, 0);
  ++v[k - 1];
}

void CorpusIndex::add_posting(Posting p) { postings_.push_back(std::move(p)); }

void CorpusIndex::set_totals(
    std::map<std::string, int64_t> totals,
    std::map<std::string, std::vector<int64_t>> feature_totals,
    std::map<std::string, int64_t> direct, std::map<std::string, int64_t> marked,
    std::map<std::string, std::vector<UnitRef>> entity_units) {
  totals_ = std::move(totals);
  feature_totals_ = std::move(feature_totals);
  direct_ = std::move(direct);
  marked_ = std::move(marked);
  entity_units_ = std::move(entity_units);
}

void CorpusIndex::finalize() {
  std::sort(postings_.begin(), postings_.end(),
            [](const Posting& l, const Posting& r) {
              return std::tie(l.doc, l.unit, l.k) <
                     std::tie(r.doc, r.unit, r.k);
            });
  for (auto& [entity, units] : entity_units_) {
    std::sort(units.begin(), units.end());
    units.erase(std::unique(units.begin(), units.end()), units.end());
  }
  for (const auto& [entity, n] : totals_) {
    feature_totals_.try_emplace(entity,
                                std::vector<int64_t>(feature_count_, 0));
  }
  a_lookup_.assign(feature_count_, {});
  b_lookup_.assign(feature_count_, {});
  for (size_t i = 0; i < postings_.size(); ++i) {
    const Posting& p = postings_[i];
    if (p.k < 1 || p.k > feature_count_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "posting feature index out of range");
    }
    for (const std::string& x : p.a) {
      a_lookup_[p.k - 1][x].push_back(static_cast<int>(i));
    }
    for (const std::string& y : p.b) {
      b_lookup_[p.k - 1][y].push_back(static_cast<int>(i));
    }
  }
}

// ---------------------------------------------------------------------------
// Building

CorpusIndex build_index(std::span<const Document> docs,
                        std::span<const Mention> mentions,
                        const FeatureCatalog& catalog) {
  const int kr = catalog.relational_count();

  for (const Mention& m : mentions) {
    bool covered = false;
    for (int k = 1; k <= kr && !covered; ++k) {
      const FeatureEntry& e = catalog.relational(k);
      covered = role_covers(e.role_a, m.position) ||
                role_covers(e.role_b, m.position);
    }
    if (!covered) {
      throw Error(ErrorCode::kUnknownFeature,
                  "mention position " + std::string(position_name(m.position)) +
                      " maps to no feature role in the catalog");
    }
  }

  std::map<std::string, std::vector<ParagraphUnit>> units_by_doc;
  int64_t unit_count = 0;
  for (const Document& d : docs) {
    auto units = split_units(d);
    unit_count += static_cast<int64_t>(units.size());
    if (!units_by_doc.emplace(d.id, std::move(units)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate document id " + d.id);
    }
  }

  // (doc, unit) -> mentions in that unit.
  std::map<UnitRef, std::vector<const Mention*>> by_unit;
  CorpusIndex index(kr, unit_count);
  for (const Mention& m : mentions) {
    auto it = units_by_doc.find(m.doc_id);
    if (it == units_by_doc.end() || m.unit_index < 0 ||
        m.unit_index >= static_cast<int>(it->second.size())) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mention of " + m.entity_id + " references unknown unit " +
                      m.doc_id + "#" + std::to_string(m.unit_index));
    }
    by_unit[{m.doc_id, m.unit_index}].push_back(&m);
    index.add_mention(m);
  }

  for (const auto& [ref, unit_mentions] : by_unit) {
    const ParagraphUnit& unit = units_by_doc.at(ref.doc)[ref.unit];
    for (int k = 1; k <= kr; ++k) {
      const FeatureEntry& e = catalog.relational(k);
      Feature f;
      feature_from_name(e.name, &f);
      if (!unit.features_present.contains(f)) continue;
      std::set<std::string> a;
      std::set<std::string> b;
      for (const Mention* m : unit_mentions) {
        if (role_covers(e.role_a, m->position)) a.insert(m->entity_id);
        if (role_covers(e.role_b, m->position)) b.insert(m->entity_id);
      }
      if (a.empty() && b.empty()) continue;
      for (const std::string& x : a) index.add_feature_hit(x, k);
      index.add_posting(Posting{ref.doc, ref.unit, k,
                                {a.begin(), a.end()},
                                {b.begin(), b.end()}});
    }
  }

  index.finalize();
  return index;
}

std::vector<Document> enrich_units(std::span<const Document> docs) {
  std::vector<Document> out(docs.begin(), docs.end());
  for (Document& d : out) d.enriched = true;
  return out;
}

EntityCounts count(const CorpusIndex& index, const std::string& x) {
  EntityCounts c;
  c.per_feature.assign(index.feature_count(), 0);
  if (auto it = index.totals().find(x); it != index.totals().end()) {
    c.total = it->second;
  }
  if (auto it = index.feature_totals().find(x);
      it != index.feature_totals().end()) {
    c.per_feature = it->second;
  }
  return c;
}

PairCounts pair_counts(const CorpusIndex& index, const std::string& x,
                       const std::string& y, int k) {
  std::span<const int> a = index.a_postings(x, k);
  if (a.empty()) return {};
  std::span<const int> b = index.b_postings(y, k);
  PairCounts pc;
  pc.denominator = static_cast<int64_t>(a.size());
  size_t i = 0;
  size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++pc.numerator;
      ++i;
      ++j;
    }
  }
  return pc;
}

}  // namespace dsm
