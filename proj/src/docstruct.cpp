#include "dsm/docstruct.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dsm/error.hpp"
#include "text_util.hpp"

namespace dsm {

// ---------------------------------------------------------------------------
// Inline spans

namespace {

// Index of the ')' closing the '(' at `open`, or npos.
size_t matching_paren(std::string_view text, size_t open) {
  int depth = 0;
  for (size_t i = open; i < text.size(); ++i) {
    if (text[i] == '(') {
      ++depth;
    } else if (text[i] == ')') {
      if (--depth == 0) return i;
    }
  }
  return std::string_view::npos;
}

void append_plain(std::vector<Span>* spans, std::string_view text) {
  if (text.empty()) return;
  if (!spans->empty() && spans->back().kind == SpanKind::kPlain) {
    spans->back().text += text;
  } else {
    spans->push_back({SpanKind::kPlain, std::string(text)});
  }
}

}  // namespace

std::vector<Span> parse_inline(std::string_view text) {
  std::vector<Span> spans;
  size_t plain_start = 0;
  size_t i = 0;
  while (i < text.size()) {
    size_t close = std::string_view::npos;
    SpanKind kind = SpanKind::kPlain;
    if (text[i] == '(') {
      close = matching_paren(text, i);
      kind = SpanKind::kBracketed;
    } else if (text[i] == '*') {
      close = text.find('*', i + 1);
      kind = SpanKind::kEmphasized;
    }
    if (close == std::string_view::npos || close == i + 1) {
      ++i;
      continue;
    }
    append_plain(&spans, text.substr(plain_start, i - plain_start));
    spans.push_back({kind, std::string(text.substr(i + 1, close - i - 1))});
    i = close + 1;
    plain_start = i;
  }
  append_plain(&spans, text.substr(plain_start));
  return spans;
}

std::string render_inline(std::span<const Span> spans) {
  std::string out;
  for (const Span& s : spans) {
    switch (s.kind) {
      case SpanKind::kPlain: out += s.text; break;
      case SpanKind::kBracketed: out += "(" + s.text + ")"; break;
      case SpanKind::kEmphasized: out += "*" + s.text + "*"; break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class MarkupParser {
 public:
  explicit MarkupParser(std::string id) { doc_.id = std::move(id); }

  Document parse(std::string_view source) {
    int line_no = 0;
    for (std::string_view raw : split_lines(source)) {
      ++line_no;
      consume(trim(raw), line_no);
    }
    if (in_infobox_) {
      throw Error(ErrorCode::kMalformedMarkup, "unterminated infobox",
                  block_start_);
    }
    if (in_footnote_) {
      throw Error(ErrorCode::kMalformedMarkup, "unterminated footnote",
                  block_start_);
    }
    flush();
    if (!title_seen_) {
      throw Error(ErrorCode::kMalformedMarkup, "document has no title",
                  line_no + 1);
    }
    return std::move(doc_);
  }

 private:
  void consume(std::string_view t, int line_no) {
    if (in_infobox_) {
      infobox_line(t, line_no);
      return;
    }
    if (in_footnote_) {
      footnote_line(t);
      return;
    }
    if (t.empty()) {
      flush();
      return;
    }
    if (int level = heading_level(t); level > 0) {
      flush();
      if (level > 6) {
        throw Error(ErrorCode::kMalformedMarkup,
                    "heading level " + std::to_string(level) + " exceeds 6",
                    line_no);
      }
      std::string text(trim(t.substr(level)));
      if (!title_seen_) {
        if (level != 1) {
          throw Error(ErrorCode::kMalformedMarkup,
                      "document must open with a level-1 title", line_no);
        }
        title_seen_ = true;
        doc_.title = text;
        push({.kind = BlockKind::kTitle, .text = std::move(text)});
      } else {
        section_ = "h" + std::to_string(++heading_count_);
        push({.kind = BlockKind::kSectionHeading,
              .level = level,
              .text = std::move(text)});
      }
      return;
    }
    if (!title_seen_) {
      throw Error(ErrorCode::kMalformedMarkup,
                  "document must open with a level-1 title", line_no);
    }
    if (t == "{{infobox") {
      flush();
      in_infobox_ = true;
      block_start_ = line_no;
      pending_ = Block{.kind = BlockKind::kInfobox};
      return;
    }
    if (t.starts_with("[^")) {
      flush();
      in_footnote_ = true;
      block_start_ = line_no;
      footnote_parts_.clear();
      footnote_line(t.substr(2));
      return;
    }
    if (t == "-" || t.starts_with("- ")) {
      flush_paragraph();
      bullet_items_.emplace_back(trim(t.substr(1)));
      return;
    }
    flush_bullets();
    paragraph_lines_.emplace_back(t);
  }

  static int heading_level(std::string_view t) {
    size_t n = 0;
    while (n < t.size() && t[n] == '#') ++n;
    if (n == 0) return 0;
    if (n < t.size() && t[n] != ' ' && t[n] != '\t') return 0;
    return static_cast<int>(n);
  }

  void infobox_line(std::string_view t, int line_no) {
    if (t == "}}") {
      if (pending_.pairs.empty()) {
        throw Error(ErrorCode::kMalformedMarkup, "infobox has no entries",
                    block_start_);
      }
      in_infobox_ = false;
      push(std::move(pending_));
      return;
    }
    if (t.empty()) return;
    size_t eq = t.find('=');
    std::string_view key = eq == std::string_view::npos ? t : trim(t.substr(0, eq));
    if (eq == std::string_view::npos || key.empty()) {
      throw Error(ErrorCode::kMalformedMarkup,
                  "infobox line is not `key = value`", line_no);
    }
    pending_.pairs.emplace_back(std::string(key),
                                std::string(trim(t.substr(eq + 1))));
  }

  void footnote_line(std::string_view t) {
    bool closes = !t.empty() && t.back() == ']';
    if (closes) t.remove_suffix(1);
    t = trim(t);
    if (!t.empty()) footnote_parts_.emplace_back(t);
    if (closes) {
      in_footnote_ = false;
      push({.kind = BlockKind::kFootnote, .text = join(footnote_parts_, " ")});
    }
  }

  void flush_paragraph() {
    if (paragraph_lines_.empty()) return;
    Block b{.kind = BlockKind::kParagraph,
            .text = join(paragraph_lines_, " ")};
    b.spans = parse_inline(b.text);
    paragraph_lines_.clear();
    push(std::move(b));
  }

  void flush_bullets() {
    if (bullet_items_.empty()) return;
    Block b{.kind = BlockKind::kBulletList};
    b.items = std::move(bullet_items_);
    bullet_items_.clear();
    push(std::move(b));
  }

  void flush() {
    flush_paragraph();
    flush_bullets();
  }

  void push(Block b) {
    b.section = section_;
    doc_.blocks.push_back(std::move(b));
  }

  Document doc_;
  bool title_seen_ = false;
  bool in_infobox_ = false;
  bool in_footnote_ = false;
  int block_start_ = 0;
  int heading_count_ = 0;
  std::string section_;
  Block pending_;
  std::vector<std::string> paragraph_lines_;
  std::vector<std::string> bullet_items_;
  std::vector<std::string> footnote_parts_;
};

}  // namespace

Document parse_document(std::string_view source, std::string id) {
  return MarkupParser(std::move(id)).parse(source);
}

std::string serialize_document(const Document& doc) {
  std::vector<std::string> parts;
  for (const Block& b : doc.blocks) {
    std::string s;
    switch (b.kind) {
      case BlockKind::kTitle:
        s = "# " + b.text;
        break;
      case BlockKind::kSectionHeading:
        s = std::string(b.level, '#') + " " + b.text;
        break;
      case BlockKind::kParagraph:
        s = b.text;
        break;
      case BlockKind::kBulletList:
        for (size_t i = 0; i < b.items.size(); ++i) {
          if (i > 0) s += "\n";
          s += "- " + b.items[i];
        }
        break;
      case BlockKind::kInfobox:
        s = "{{infobox\n";
        for (const auto& [key, value] : b.pairs) s += key + " = " + value + "\n";
        s += "}}";
        break;
      case BlockKind::kFootnote:
        s = "[^ " + b.text + " ]";
        break;
    }
    parts.push_back(std::move(s));
  }
  return join(parts, "\n\n") + "\n";
}

// ---------------------------------------------------------------------------
// Units

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::kBullets: return "bullets";
    case Feature::kFootnote: return "footnote";
    case Feature::kTitle: return "title";
    case Feature::kSectionHeading: return "section_heading";
    case Feature::kInfobox: return "infobox";
  }
  return "";
}

bool feature_from_name(std::string_view name, Feature* out) {
  for (Feature f : {Feature::kBullets, Feature::kFootnote, Feature::kTitle,
                    Feature::kSectionHeading, Feature::kInfobox}) {
    if (feature_name(f) == name) {
      *out = f;
      return true;
    }
  }
  return false;
}

std::vector<ParagraphUnit> split_units(const Document& doc) {
  std::vector<ParagraphUnit> units;
  // (level, block index) of the open headings.
  std::vector<std::pair<int, int>> stack;
  const auto& blocks = doc.blocks;

  auto make_unit = [&](int first_block) {
    ParagraphUnit u;
    u.doc_id = doc.id;
    u.unit_index = static_cast<int>(units.size());
    u.heading_path.push_back(doc.title);
    for (const auto& [level, idx] : stack) {
      u.heading_path.push_back(blocks[idx].text);
      u.heading_blocks.push_back(idx);
    }
    u.section = blocks[first_block].section;
    u.blocks.push_back(first_block);
    return u;
  };

  for (size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    const int bi = static_cast<int>(i);
    if (b.kind == BlockKind::kSectionHeading) {
      while (!stack.empty() && stack.back().first >= b.level) stack.pop_back();
      stack.emplace_back(b.level, bi);
    }
    ParagraphUnit u = make_unit(bi);
    switch (b.kind) {
      case BlockKind::kTitle:
        u.features_present.insert(Feature::kTitle);
        break;
      case BlockKind::kSectionHeading:
        u.features_present.insert(Feature::kSectionHeading);
        break;
      case BlockKind::kParagraph:
        u.preceding_text = b.text;
        if (i + 1 < blocks.size() &&
            blocks[i + 1].kind == BlockKind::kBulletList) {
          u.bullets = blocks[i + 1].items;
          u.blocks.push_back(bi + 1);
          u.features_present.insert(Feature::kBullets);
          ++i;
        }
        break;
      case BlockKind::kBulletList:
        u.bullets = b.items;
        u.features_present.insert(Feature::kBullets);
        break;
      case BlockKind::kInfobox:
        u.features_present.insert(Feature::kInfobox);
        break;
      case BlockKind::kFootnote:
        u.features_present.insert(Feature::kFootnote);
        if (doc.enriched) {
          for (int j = bi - 1; j >= 0 && blocks[j].section == b.section; --j) {
            if (blocks[j].kind == BlockKind::kParagraph ||
                blocks[j].kind == BlockKind::kBulletList) {
              u.anchor_block = j;
              break;
            }
            if (blocks[j].kind == BlockKind::kSectionHeading) break;
          }
        }
        break;
    }
    if (doc.enriched) {
      u.features_present.insert(Feature::kTitle);
      size_t enclosing = u.heading_blocks.size();
      if (b.kind == BlockKind::kSectionHeading) --enclosing;
      if (enclosing > 0) u.features_present.insert(Feature::kSectionHeading);
    }
    units.push_back(std::move(u));
  }
  return units;
}

// ---------------------------------------------------------------------------
// Gazetteers

std::string normalize_surface(std::string_view text) {
  return join(tokenize(text), " ");
}

Gazetteer::Gazetteer(std::string entity_type)
    : entity_type_(std::move(entity_type)) {}

void Gazetteer::add(std::string_view surface, const std::string& entity_id) {
  std::string key = normalize_surface(surface);
  if (key.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty surface form");
  }
  if (entity_id.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty entity id");
  }
  auto [it, inserted] = surface_forms_.emplace(key, entity_id);
  if (!inserted && it->second != entity_id) {
    throw Error(ErrorCode::kInvalidArgument,
                "surface '" + key + "' bound to both " + it->second + " and " +
                    entity_id);
  }
}

std::vector<Gazetteer> parse_gazetteers(std::string_view text) {
  std::vector<Gazetteer> out;
  std::map<std::string, size_t> by_type;
  int line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw Error(ErrorCode::kParseError,
                  "expected 3 tab-separated fields, got " +
                      std::to_string(fields.size()),
                  line_no);
    }
    std::string type(trim(fields[0]));
    std::string id(trim(fields[2]));
    if (type.empty() || id.empty() || trim(fields[1]).empty()) {
      throw Error(ErrorCode::kParseError, "empty gazetteer field", line_no);
    }
    auto [it, inserted] = by_type.emplace(type, out.size());
    if (inserted) out.emplace_back(type);
    try {
      out[it->second].add(fields[1], id);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, e.what(), line_no);
    }
  }
  return out;
}

std::vector<Gazetteer> load_gazetteers(const std::string& path) {
  return parse_gazetteers(read_file(path));
}

std::string serialize_gazetteers(std::span<const Gazetteer> gazetteers) {
  std::string out;
  for (const Gazetteer& g : gazetteers) {
    for (const auto& [surface, id] : g.surface_forms()) {
      out += g.entity_type() + "\t" + surface + "\t" + id + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Annotation

std::string_view position_name(Position p) {
  switch (p) {
    case Position::kPrecedingText: return "PrecedingText";
    case Position::kBulletItem: return "BulletItem";
    case Position::kTitle: return "Title";
    case Position::kSectionHeading: return "SectionHeading";
    case Position::kInfoboxKey: return "InfoboxKey";
    case Position::kInfoboxValue: return "InfoboxValue";
    case Position::kFootnote: return "Footnote";
    case Position::kBodyText: return "BodyText";
  }
  return "";
}

bool position_from_name(std::string_view name, Position* out) {
  for (int i = 0; i <= static_cast<int>(Position::kBodyText); ++i) {
    auto p = static_cast<Position>(i);
    if (position_name(p) == name) {
      *out = p;
      return true;
    }
  }
  return false;
}

std::string_view span_kind_name(SpanKind k) {
  switch (k) {
    case SpanKind::kPlain: return "Plain";
    case SpanKind::kBracketed: return "Bracketed";
    case SpanKind::kEmphasized: return "Emphasized";
  }
  return "";
}

bool span_kind_from_name(std::string_view name, SpanKind* out) {
  for (SpanKind k :
       {SpanKind::kPlain, SpanKind::kBracketed, SpanKind::kEmphasized}) {
    if (span_kind_name(k) == name) {
      *out = k;
      return true;
    }
  }
  return false;
}

Annotator::Annotator(std::span<const Gazetteer> gazetteers) {
  for (const Gazetteer& g : gazetteers) {
    for (const auto& [surface, id] : g.surface_forms()) {
      auto it = table_.find(surface);
      if (it == table_.end()) {
        table_.emplace(surface, Entry{id, g.entity_type()});
      } else if (id < it->second.entity_id) {
        it->second = Entry{id, g.entity_type()};
      }
      max_tokens_ = std::max(max_tokens_, tokenize(surface).size());
    }
  }
}

void Annotator::match_text(
    std::string_view text, SpanKind kind,
    const std::function<void(const Entry&, SpanKind)>& emit) const {
  std::vector<std::string> tokens = tokenize(text);
  size_t i = 0;
  while (i < tokens.size()) {
    size_t matched = 0;
    for (size_t len = std::min(max_tokens_, tokens.size() - i); len > 0;
         --len) {
      std::string key = tokens[i];
      for (size_t t = 1; t < len; ++t) key += " " + tokens[i + t];
      auto it = table_.find(key);
      if (it != table_.end()) {
        emit(it->second, kind);
        matched = len;
        break;
      }
    }
    i += matched > 0 ? matched : 1;
  }
}

void Annotator::match_region(
    std::string_view text, bool parse_spans,
    const std::function<void(const Entry&, SpanKind)>& emit) const {
  if (!parse_spans) {
    match_text(text, SpanKind::kPlain, emit);
    return;
  }
  for (const Span& s : parse_inline(text)) match_text(s.text, s.kind, emit);
}

std::vector<Mention> Annotator::annotate(const Document& doc) const {
  return annotate(doc, split_units(doc));
}

std::vector<Mention> Annotator::annotate(
    const Document& doc, std::span<const ParagraphUnit> units) const {
  std::vector<Mention> out;
  for (const ParagraphUnit& u : units) {
    auto emitter = [&](Position pos, int block, bool context) {
      return [&out, &doc, &u, pos, block, context](const Entry& e,
                                                   SpanKind kind) {
        out.push_back(Mention{.entity_id = e.entity_id,
                              .entity_type = e.entity_type,
                              .doc_id = doc.id,
                              .unit_index = u.unit_index,
                              .position = pos,
                              .span_kind = kind,
                              .block = block,
                              .context = context});
      };
    };
    auto match_body_block = [&](int bi, Position para_pos, Position item_pos,
                                bool context) {
      const Block& b = doc.blocks[bi];
      if (b.kind == BlockKind::kParagraph) {
        auto emit = emitter(para_pos, bi, context);
        for (const Span& s : b.spans) match_text(s.text, s.kind, emit);
      } else if (b.kind == BlockKind::kBulletList) {
        auto emit = emitter(item_pos, bi, context);
        for (const std::string& item : b.items) match_region(item, true, emit);
      }
    };

    const Block& first = doc.blocks[u.blocks.front()];
    if (doc.enriched) {
      if (first.kind != BlockKind::kTitle) {
        match_region(doc.title, true, emitter(Position::kTitle, 0, true));
      }
      for (int hb : u.heading_blocks) {
        if (hb == u.blocks.front()) continue;
        match_region(doc.blocks[hb].text, true,
                     emitter(Position::kSectionHeading, hb, true));
      }
      if (u.anchor_block >= 0) {
        match_body_block(u.anchor_block, Position::kBodyText,
                         Position::kBodyText, true);
      }
    }

    const bool fused = !u.bullets.empty() || u.blocks.size() > 1;
    for (int bi : u.blocks) {
      const Block& b = doc.blocks[bi];
      switch (b.kind) {
        case BlockKind::kTitle:
          match_region(b.text, true, emitter(Position::kTitle, bi, false));
          break;
        case BlockKind::kSectionHeading:
          match_region(b.text, true,
                       emitter(Position::kSectionHeading, bi, false));
          break;
        case BlockKind::kParagraph:
        case BlockKind::kBulletList:
          match_body_block(
              bi, fused ? Position::kPrecedingText : Position::kBodyText,
              Position::kBulletItem, false);
          break;
        case BlockKind::kInfobox:
          for (const auto& [key, value] : b.pairs) {
            match_region(key, true, emitter(Position::kInfoboxKey, bi, false));
            match_region(value, true,
                         emitter(Position::kInfoboxValue, bi, false));
          }
          break;
        case BlockKind::kFootnote:
          match_region(b.text, true, emitter(Position::kFootnote, bi, false));
          break;
      }
    }
  }
  return out;
}

std::vector<Mention> annotate(const Document& doc,
                              std::span<const Gazetteer> gazetteers) {
  if (gazetteers.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no gazetteers supplied");
  }
  return Annotator(gazetteers).annotate(doc);
}

}  // namespace dsm
