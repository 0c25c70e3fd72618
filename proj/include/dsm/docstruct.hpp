#pragma once

// Structural document model for the line-oriented markup dialect, the
// paragraph-unit splitter that defines the DSM counting unit, and a
// gazetteer-based entity annotator.
//
// Dialect summary:
//   # text               title (first occurrence) or level-1 heading
//   ## .. ###### text    deeper headings
//   - text               bullet item; contiguous items form one list
//   {{infobox ... }}     infobox block with `key = value` lines
//   [^ text ]            footnote (may continue over several lines)
//   (text) / *text*      bracketed / emphasized inline spans
//   blank line           paragraph separator

#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dsm {

enum class SpanKind { kPlain, kBracketed, kEmphasized };

struct Span {
  SpanKind kind = SpanKind::kPlain;
  std::string text;  // without the delimiters

  bool operator==(const Span&) const = default;
};

// Splits inline text into non-overlapping spans. Unbalanced or empty
// delimiters are kept as plain text, so render_inline(parse_inline(t)) == t.
std::vector<Span> parse_inline(std::string_view text);
std::string render_inline(std::span<const Span> spans);

enum class BlockKind {
  kTitle,
  kSectionHeading,
  kParagraph,
  kBulletList,
  kInfobox,
  kFootnote,
};

struct Block {
  BlockKind kind = BlockKind::kParagraph;
  int level = 0;  // 1..6 for headings
  // Title/heading/footnote text, or the rendered paragraph text.
  std::string text;
  std::vector<Span> spans;                                  // paragraph
  std::vector<std::string> items;                           // bullet list
  std::vector<std::pair<std::string, std::string>> pairs;   // infobox
  // Id of the nearest enclosing section heading ("" in the preamble).
  std::string section;

  bool operator==(const Block&) const = default;
};

struct Document {
  std::string id;
  std::string title;
  std::vector<Block> blocks;
  // Set by enrich_units(): each unit's heading context becomes part of its
  // searchable text.
  bool enriched = false;

  bool operator==(const Document&) const = default;
};

// Parses one document. Throws Error{kMalformedMarkup} with the offending
// line for unterminated infobox/footnote blocks, headings deeper than six
// levels, empty infoboxes, and sources that do not open with a title.
Document parse_document(std::string_view source, std::string id = "");

// Canonical markup; parse_document(serialize_document(d), d.id) == d for any
// parsed, non-enriched document.
std::string serialize_document(const Document& doc);

// Structural features a unit can carry. The numbering is the default
// feature index k used by the standard catalog.
enum class Feature {
  kBullets = 1,
  kFootnote = 2,
  kTitle = 3,
  kSectionHeading = 4,
  kInfobox = 5,
};

std::string_view feature_name(Feature f);
// Returns false for names outside the fixed feature set.
bool feature_from_name(std::string_view name, Feature* out);

struct ParagraphUnit {
  std::string doc_id;
  int unit_index = 0;
  std::vector<std::string> heading_path;  // title, then enclosing headings
  std::string preceding_text;
  std::vector<std::string> bullets;
  std::set<Feature> features_present;
  std::vector<int> blocks;  // source block indices, ascending
  std::string section;
  // Enclosing heading blocks, outermost first; includes the unit's own
  // heading block for heading units.
  std::vector<int> heading_blocks;
  // Enriched footnote units: the paragraph/list block the footnote annotates.
  int anchor_block = -1;
};

// One unit per title/heading/infobox/footnote block; a paragraph directly
// followed by a bullet list fuses with it, so no unit holds two lists.
std::vector<ParagraphUnit> split_units(const Document& doc);

// Lowercases ASCII letters and collapses the input to its token sequence
// joined by single spaces. Tokens are maximal alphanumeric runs (non-ASCII
// bytes count as alphanumeric); every other non-space character is a token
// of its own.
std::string normalize_surface(std::string_view text);

class Gazetteer {
 public:
  explicit Gazetteer(std::string entity_type);

  // Throws Error{kInvalidArgument} for empty surfaces or a surface already
  // bound to a different entity.
  void add(std::string_view surface, const std::string& entity_id);

  const std::string& entity_type() const { return entity_type_; }
  // Keyed by normalized surface.
  const std::map<std::string, std::string>& surface_forms() const {
    return surface_forms_;
  }

 private:
  std::string entity_type_;
  std::map<std::string, std::string> surface_forms_;
};

// Reads `entity_type<TAB>surface_form<TAB>entity_id` lines; one gazetteer
// per entity type in order of first appearance. Blank lines are skipped.
std::vector<Gazetteer> parse_gazetteers(std::string_view text);
std::vector<Gazetteer> load_gazetteers(const std::string& path);
std::string serialize_gazetteers(std::span<const Gazetteer> gazetteers);

enum class Position {
  kPrecedingText,
  kBulletItem,
  kTitle,
  kSectionHeading,
  kInfoboxKey,
  kInfoboxValue,
  kFootnote,
  kBodyText,
};

std::string_view position_name(Position p);
bool position_from_name(std::string_view name, Position* out);
std::string_view span_kind_name(SpanKind k);
bool span_kind_from_name(std::string_view name, SpanKind* out);

struct Mention {
  std::string entity_id;
  std::string entity_type;
  std::string doc_id;
  int unit_index = 0;
  Position position = Position::kBodyText;
  SpanKind span_kind = SpanKind::kPlain;
  int block = 0;
  // True for mentions found in enrichment context rather than in the
  // unit's own blocks.
  bool context = false;

  bool operator==(const Mention&) const = default;
};

// Whole-token, case-insensitive dictionary matcher. Scans left to right;
// at each token the longest surface wins, ties go to the smallest entity
// id. Matches never cross span or block boundaries.
class Annotator {
 public:
  explicit Annotator(std::span<const Gazetteer> gazetteers);

  std::vector<Mention> annotate(const Document& doc) const;
  std::vector<Mention> annotate(const Document& doc,
                                std::span<const ParagraphUnit> units) const;

 private:
  struct Entry {
    std::string entity_id;
    std::string entity_type;
  };

  void match_text(std::string_view text, SpanKind kind,
                  const std::function<void(const Entry&, SpanKind)>& emit)
      const;
  void match_region(std::string_view text, bool parse_spans,
                    const std::function<void(const Entry&, SpanKind)>& emit)
      const;

  std::unordered_map<std::string, Entry> table_;
  size_t max_tokens_ = 0;
};

// Convenience wrapper; throws Error{kInvalidArgument} if gazetteers is empty.
std::vector<Mention> annotate(const Document& doc,
                              std::span<const Gazetteer> gazetteers);

}  // namespace dsm
