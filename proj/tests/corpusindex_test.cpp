#include <gtest/gtest.h>

#include "dsm/corpusindex.hpp"
#include "dsm/error.hpp"

namespace dsm {
namespace {

constexpr int kBullets = 1;
constexpr int kTitle = 3;
constexpr int kHeading = 4;
constexpr int kInfobox = 5;

struct Built {
  std::vector<Document> docs;
  std::vector<Mention> mentions;
  CorpusIndex index;
};

Built build(std::vector<std::string> sources,
            std::initializer_list<const char*> names, bool enrich,
            const FeatureCatalog& catalog = FeatureCatalog::standard()) {
  Gazetteer g("thing");
  for (const char* n : names) g.add(n, n);
  std::vector<Gazetteer> gs{g};
  Built b;
  for (size_t i = 0; i < sources.size(); ++i) {
    b.docs.push_back(parse_document(sources[i], "d" + std::to_string(i)));
  }
  if (enrich) b.docs = enrich_units(b.docs);
  for (const Document& d : b.docs) {
    auto m = annotate(d, gs);
    b.mentions.insert(b.mentions.end(), m.begin(), m.end());
  }
  b.index = build_index(b.docs, b.mentions, catalog);
  return b;
}

const char* kListDoc = "# Overview\nX contains the following:\n- X1\n- X2";

TEST(BuildIndex, EmptyCorpus) {
  CorpusIndex idx = build_index({}, {}, FeatureCatalog::standard());
  EXPECT_EQ(idx.unit_count(), 0);
  EXPECT_TRUE(idx.totals().empty());
  EXPECT_TRUE(idx.postings().empty());
  EXPECT_EQ(count(idx, "X").total, 0);
}

TEST(BuildIndex, BulletListExample) {
  for (bool enrich : {false, true}) {
    Built b = build({kListDoc}, {"X", "X1", "X2"}, enrich);
    EntityCounts c = count(b.index, "X");
    EXPECT_EQ(c.total, 1);
    EXPECT_EQ(c.per_feature[kBullets - 1], 1);
    const Posting* bullets = nullptr;
    for (const Posting& p : b.index.postings()) {
      if (p.k == kBullets) bullets = &p;
    }
    ASSERT_NE(bullets, nullptr);
    EXPECT_EQ(bullets->unit, 1);
    EXPECT_EQ(bullets->a, std::vector<std::string>{"X"});
    EXPECT_EQ(bullets->b, (std::vector<std::string>{"X1", "X2"}));
  }
}

TEST(BuildIndex, EntityInBothRoles) {
  Built b = build({"# T\nX and Y:\n- X\n- Z"}, {"X", "Y", "Z"}, false);
  ASSERT_EQ(b.index.postings().size(), 1u);
  const Posting& p = b.index.postings()[0];
  EXPECT_EQ(p.a, (std::vector<std::string>{"X", "Y"}));
  EXPECT_EQ(p.b, (std::vector<std::string>{"X", "Z"}));
  // Indicator semantics: two mentions, one unit.
  EXPECT_EQ(count(b.index, "X").total, 2);
  EXPECT_EQ(pair_counts(b.index, "X", "X", kBullets), (PairCounts{1, 1}));
}

TEST(EnrichUnits, TitleJoinsBodyUnit) {
  Built b = build({"# Alice\nShe met Bob."}, {"Alice", "Bob"}, true);
  EXPECT_EQ(pair_counts(b.index, "Alice", "Bob", kTitle), (PairCounts{1, 2}));
  const Posting* title_body = nullptr;
  for (const Posting& p : b.index.postings()) {
    if (p.k == kTitle && p.unit == 1) title_body = &p;
  }
  ASSERT_NE(title_body, nullptr);
  EXPECT_EQ(title_body->a, std::vector<std::string>{"Alice"});
  EXPECT_EQ(title_body->b, std::vector<std::string>{"Bob"});

  Built plain = build({"# Alice\nShe met Bob."}, {"Alice", "Bob"}, false);
  EXPECT_EQ(pair_counts(plain.index, "Alice", "Bob", kTitle).numerator, 0);
}

TEST(EnrichUnits, NoHeadingsAddsOnlyTitle) {
  auto docs = enrich_units(std::vector<Document>{parse_document("# T\nbody")});
  auto units = split_units(docs[0]);
  EXPECT_EQ(units[1].features_present, std::set<Feature>{Feature::kTitle});
  EXPECT_EQ(docs[0].blocks, parse_document("# T\nbody").blocks);
}

TEST(EnrichUnits, SiblingsShareTitleUnit) {
  Built b = build({"# Alice\nBob and Carol are siblings."},
                  {"Alice", "Bob", "Carol"}, true);
  bool found = false;
  for (const Posting& p : b.index.postings()) {
    if (p.k == kTitle && p.unit == 1) {
      EXPECT_EQ(p.b, (std::vector<std::string>{"Bob", "Carol"}));
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(EnrichUnits, HeadingCoversUnitsBelowIt) {
  Built b = build({"# T\n# Family\nBob\n\n## Deeper\nCarol"},
                  {"Family", "Bob", "Carol"}, true);
  EXPECT_EQ(pair_counts(b.index, "Family", "Bob", kHeading),
            (PairCounts{1, 4}));
  EXPECT_EQ(pair_counts(b.index, "Family", "Carol", kHeading),
            (PairCounts{1, 4}));
}

TEST(Count, UnknownEntity) {
  Built b = build({kListDoc}, {"X"}, false);
  EntityCounts c = count(b.index, "nobody");
  EXPECT_EQ(c.total, 0);
  EXPECT_EQ(c.per_feature, std::vector<int64_t>(5, 0));
}

TEST(Count, TwiceInBodyOnceInTitle) {
  Built b = build({"# Alice\nAlice and Alice."}, {"Alice"}, false);
  EXPECT_EQ(count(b.index, "Alice").total, 3);
}

TEST(PairCounts, BulletExample) {
  Built b = build({kListDoc}, {"X", "X1", "X2"}, true);
  EXPECT_EQ(pair_counts(b.index, "X", "X1", kBullets), (PairCounts{1, 1}));
  EXPECT_EQ(pair_counts(b.index, "X1", "X", kBullets), (PairCounts{0, 0}));
  EXPECT_EQ(pair_counts(b.index, "X2", "X1", kBullets), (PairCounts{0, 0}));
  EXPECT_EQ(pair_counts(b.index, "X", "X1", 0), (PairCounts{}));
  EXPECT_EQ(pair_counts(b.index, "X", "X1", 99), (PairCounts{}));
}

TEST(PairCounts, InfoboxKeyAndTitleAreHigherRole) {
  Built b = build({"# Alice\n{{infobox\nsibling = Bob\nBob = Carol\n}}"},
                  {"Alice", "Bob", "Carol"}, true);
  EXPECT_EQ(pair_counts(b.index, "Alice", "Bob", kInfobox), (PairCounts{1, 1}));
  EXPECT_EQ(pair_counts(b.index, "Bob", "Carol", kInfobox), (PairCounts{1, 1}));
  EXPECT_EQ(pair_counts(b.index, "Carol", "Bob", kInfobox).denominator, 0);
}

TEST(BuildIndex, IndependentOfDocumentOrder) {
  std::vector<std::string> srcs = {kListDoc, "# A\nX met X1.", "# X\n- X2"};
  Built a = build(srcs, {"X", "X1", "X2"}, true);
  std::vector<Document> rev(a.docs.rbegin(), a.docs.rend());
  EXPECT_EQ(build_index(rev, a.mentions, FeatureCatalog::standard()), a.index);
}

TEST(BuildIndex, Errors) {
  Built b = build({kListDoc}, {"X", "X1"}, false);
  std::vector<Mention> dangling = b.mentions;
  dangling[0].unit_index = 42;
  EXPECT_THROW(build_index(b.docs, dangling, FeatureCatalog::standard()),
               Error);
  std::vector<Document> dup = {b.docs[0], b.docs[0]};
  EXPECT_THROW(build_index(dup, {}, FeatureCatalog::standard()), Error);

  FeatureCatalog bullets_only({{1, "bullets", "preceding_text", "bullet_item"}});
  Built t = build({"# X\nbody"}, {"X"}, false);
  std::vector<Mention> title = {t.mentions[0]};
  ASSERT_EQ(title[0].position, Position::kTitle);
  try {
    build_index(t.docs, title, bullets_only);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownFeature);
  }
}

TEST(FeatureCatalog, Validation) {
  auto code = [](std::vector<FeatureEntry> entries) {
    try {
      FeatureCatalog c(std::move(entries));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code({{1, "nonsense", "title", "body"}}), ErrorCode::kUnknownFeature);
  EXPECT_EQ(code({{1, "title", "title", "nowhere"}}), ErrorCode::kUnknownFeature);
  EXPECT_EQ(code({{2, "title", "title", "body"}}), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code({{1, "title", "title", "body", -1.0}}),
            ErrorCode::kInvalidArgument);

  FeatureCatalog s = FeatureCatalog::standard(true, 0.5);
  EXPECT_EQ(s.relational_count(), 5);
  ASSERT_NE(s.absolute(), nullptr);
  EXPECT_EQ(s.absolute()->weight, 0.5);
  EXPECT_EQ(FeatureCatalog::standard(false).absolute(), nullptr);
  EXPECT_EQ(s.scaled(2.0).relational(3).weight, 2.0);
}

}  // namespace
}  // namespace dsm
