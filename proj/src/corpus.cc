// Copyright 2026 The relpcnn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "relpcnn/corpus.h"

#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "relpcnn/errors.h"
#include "relpcnn/utf8.h"

namespace relpcnn {

namespace {

using G = MarkupGrammar;

[[noreturn]] void MarkupError(std::string_view doc_id, std::size_t offset,
                              const std::string &what) {
  std::ostringstream msg;
  msg << "markup error in document '" << doc_id << "' at byte offset "
      << offset << ": " << what;
  throw ParseError(msg.str());
}

bool StartsWithAt(std::string_view text, std::size_t pos,
                  std::string_view prefix) {
  return text.compare(pos, prefix.size(), prefix) == 0;
}

bool IsContinuationByte(char ch) {
  return (static_cast<unsigned char>(ch) & 0xC0) == 0x80;
}

// Strips entity markup from one segment. `base` is the byte offset of
// `content` within the whole input, used for error messages.
std::string ParseSegment(std::string_view content, std::size_t base,
                         std::string_view doc_id, bool in_title,
                         std::vector<EntitySpan> *entities) {
  std::string out;
  out.reserve(content.size());
  std::size_t chars = 0;
  bool open = false;
  std::size_t open_offset = 0;
  std::size_t open_byte = 0;
  EntitySpan current;

  std::size_t i = 0;
  while (i < content.size()) {
    const char ch = content[i];
    if (ch != '<') {
      out.push_back(ch);
      if (!IsContinuationByte(ch)) ++chars;
      ++i;
      continue;
    }
    if (StartsWithAt(content, i, G::kEntityOpen)) {
      if (open) MarkupError(doc_id, base + i, "nested entity tag");
      const std::size_t id_begin = i + G::kEntityOpen.size();
      const std::size_t id_end = content.find('"', id_begin);
      if (id_end == std::string_view::npos ||
          !StartsWithAt(content, id_end, G::kAttrEnd)) {
        MarkupError(doc_id, base + i, "unterminated entity tag");
      }
      if (id_end == id_begin) {
        MarkupError(doc_id, base + i, "entity tag without id");
      }
      current = EntitySpan{};
      current.entity_id = std::string(content.substr(id_begin, id_end - id_begin));
      current.start_char = chars;
      current.in_title = in_title;
      open = true;
      open_offset = base + i;
      open_byte = out.size();
      i = id_end + G::kAttrEnd.size();
    } else if (StartsWithAt(content, i, G::kEntityClose)) {
      if (!open) MarkupError(doc_id, base + i, "closing tag without entity");
      if (chars == current.start_char) {
        MarkupError(doc_id, open_offset, "empty entity '" + current.entity_id + "'");
      }
      current.end_char = chars;
      current.surface = out.substr(open_byte);
      entities->push_back(std::move(current));
      open = false;
      i += G::kEntityClose.size();
    } else if (i + 1 < content.size() &&
               (content[i + 1] == '/' ||
                std::isalpha(static_cast<unsigned char>(content[i + 1])))) {
      MarkupError(doc_id, base + i, "unexpected tag");
    } else {
      // A literal '<' in running text.
      out.push_back(ch);
      ++chars;
      ++i;
    }
  }
  if (open) {
    MarkupError(doc_id, open_offset,
                "entity '" + current.entity_id + "' is never closed");
  }
  return out;
}

// Locates <open>...</close> inside [begin, end). Returns false if the open
// tag is absent.
bool FindElement(std::string_view raw, std::size_t begin, std::size_t end,
                 std::string_view open, std::string_view close,
                 std::string_view doc_id, std::size_t *content_begin,
                 std::size_t *content_end) {
  const std::size_t at = raw.substr(0, end).find(open, begin);
  if (at == std::string_view::npos) return false;
  const std::size_t close_at = raw.substr(0, end).find(close, at + open.size());
  if (close_at == std::string_view::npos) {
    MarkupError(doc_id, at, "missing " + std::string(close));
  }
  *content_begin = at + open.size();
  *content_end = close_at;
  return true;
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string ValidLabelList() {
  std::string list;
  for (std::string_view name : kRelationNames) {
    if (!list.empty()) list += ", ";
    list += name;
  }
  return list;
}

[[noreturn]] void LineError(std::size_t line, const std::string &what) {
  throw ParseError("relations line " + std::to_string(line) + ": " + what);
}

}  // namespace

const EntitySpan *Document::find_entity(std::string_view id) const {
  for (const EntitySpan &span : entities) {
    if (span.entity_id == id) return &span;
  }
  return nullptr;
}

std::string_view source_tag_name(SourceTag tag) {
  switch (tag) {
    case SourceTag::kTask11:
      return "task1.1";
    case SourceTag::kTask12:
      return "task1.2";
    case SourceTag::kMerged:
      return "merged";
  }
  return "unknown";
}

std::optional<SourceTag> parse_source_tag(std::string_view name) {
  for (SourceTag tag :
       {SourceTag::kTask11, SourceTag::kTask12, SourceTag::kMerged}) {
    if (source_tag_name(tag) == name) return tag;
  }
  return std::nullopt;
}

std::vector<Document> parse_documents(std::string_view raw) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen_docs;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = raw.find(G::kTextOpen, pos);
    if (open == std::string_view::npos) break;
    const std::size_t id_begin = open + G::kTextOpen.size();
    const std::size_t id_end = raw.find('"', id_begin);
    if (id_end == std::string_view::npos || raw.compare(id_end, 2, "\">") != 0) {
      MarkupError("?", open, "unterminated text tag");
    }
    Document doc;
    doc.doc_id = std::string(raw.substr(id_begin, id_end - id_begin));
    if (doc.doc_id.empty()) MarkupError("?", open, "text tag without id");
    if (!seen_docs.insert(doc.doc_id).second) {
      MarkupError(doc.doc_id, open, "duplicate document id");
    }
    const std::size_t body = id_end + 2;
    const std::size_t close = raw.find(G::kTextClose, body);
    if (close == std::string_view::npos) {
      MarkupError(doc.doc_id, open, "missing </text>");
    }

    std::size_t cb = 0, ce = 0;
    if (FindElement(raw, body, close, G::kTitleOpen, G::kTitleClose,
                    doc.doc_id, &cb, &ce)) {
      doc.title = ParseSegment(raw.substr(cb, ce - cb), cb, doc.doc_id,
                               /*in_title=*/true, &doc.entities);
    }
    if (FindElement(raw, body, close, G::kAbstractOpen, G::kAbstractClose,
                    doc.doc_id, &cb, &ce)) {
      doc.abstract = ParseSegment(raw.substr(cb, ce - cb), cb, doc.doc_id,
                                  /*in_title=*/false, &doc.entities);
    }

    std::unordered_set<std::string> ids;
    for (const EntitySpan &span : doc.entities) {
      if (!ids.insert(span.entity_id).second) {
        MarkupError(doc.doc_id, open,
                    "duplicate entity id '" + span.entity_id + "'");
      }
    }
    docs.push_back(std::move(doc));
    pos = close + G::kTextClose.size();
  }
  return docs;
}

std::vector<RelationRecord> parse_relations(std::string_view raw) {
  std::vector<RelationRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t eol = raw.find('\n', pos);
    if (eol == std::string_view::npos) eol = raw.size();
    const std::string_view line = Trim(raw.substr(pos, eol - pos));
    ++line_no;
    pos = eol + 1;
    if (line.empty()) continue;

    const std::size_t paren = line.find('(');
    if (paren == std::string_view::npos || line.back() != ')') {
      LineError(line_no, "expected LABEL(id1,id2[,REVERSE])");
    }
    RelationRecord rec;
    rec.line = line_no;
    const std::string_view label = line.substr(0, paren);
    if (!label.empty()) {
      rec.label = parse_relation_name(label);
      if (!rec.label) {
        LineError(line_no, "unknown label '" + std::string(label) +
                               "'; valid labels: " + ValidLabelList());
      }
    }
    std::vector<std::string_view> args;
    std::string_view inner = line.substr(paren + 1, line.size() - paren - 2);
    while (true) {
      const std::size_t comma = inner.find(',');
      args.push_back(Trim(inner.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      inner.remove_prefix(comma + 1);
    }
    if (args.size() == 3) {
      if (args[2] != "REVERSE") {
        LineError(line_no, "third argument must be REVERSE");
      }
      rec.reverse = true;
    } else if (args.size() != 2) {
      LineError(line_no, "expected two entity ids");
    }
    if (args[0].empty() || args[1].empty()) LineError(line_no, "empty entity id");
    rec.arg1_id = std::string(args[0]);
    rec.arg2_id = std::string(args[1]);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ResolvedRelation> resolve(const Corpus &corpus) {
  struct Where {
    const Document *doc;
    const EntitySpan *span;
  };
  std::unordered_map<std::string, Where> index;
  std::unordered_set<std::string> ambiguous;
  for (const Document &doc : corpus.documents) {
    for (const EntitySpan &span : doc.entities) {
      if (!index.emplace(span.entity_id, Where{&doc, &span}).second) {
        ambiguous.insert(span.entity_id);
      }
    }
  }

  std::vector<ResolvedRelation> out;
  out.reserve(corpus.relations.size());
  for (const RelationRecord &rel : corpus.relations) {
    auto fail = [&](const std::string &what) {
      throw ResolveError("relation '" + format_relation(rel) + "' (line " +
                         std::to_string(rel.line) + "): " + what);
    };
    auto lookup = [&](const std::string &id) -> Where {
      if (ambiguous.count(id)) fail("entity id '" + id + "' is ambiguous");
      auto it = index.find(id);
      if (it == index.end()) fail("unknown entity id '" + id + "'");
      return it->second;
    };
    if (rel.arg1_id == rel.arg2_id) fail("both arguments are the same entity");
    const Where a = lookup(rel.arg1_id);
    const Where b = lookup(rel.arg2_id);
    if (a.doc != b.doc) fail("arguments belong to different documents");
    if (a.span->in_title != b.span->in_title) {
      fail("arguments straddle title and abstract");
    }
    out.push_back(ResolvedRelation{a.doc, a.span, b.span, &rel});
  }
  return out;
}

LabelCounts class_histogram(const Corpus &corpus) {
  LabelCounts counts{};
  for (const RelationRecord &rel : corpus.relations) {
    if (rel.label) ++counts[relation_index(*rel.label)];
  }
  return counts;
}

std::string render_segment_markup(const Document &doc, bool in_title) {
  const std::u32string text = utf8::decode(doc.segment(in_title));
  std::vector<const EntitySpan *> spans;
  for (const EntitySpan &span : doc.entities) {
    if (span.in_title == in_title) spans.push_back(&span);
  }
  std::string out;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    for (const EntitySpan *span : spans) {
      if (span->end_char == i) out += G::kEntityClose;
    }
    for (const EntitySpan *span : spans) {
      if (span->start_char == i) {
        out += G::kEntityOpen;
        out += span->entity_id;
        out += G::kAttrEnd;
      }
    }
    if (i < text.size()) utf8::append(out, text[i]);
  }
  return out;
}

std::string format_relation(const RelationRecord &rel) {
  std::string out;
  if (rel.label) out += relation_name(*rel.label);
  out += '(';
  out += rel.arg1_id;
  out += ',';
  out += rel.arg2_id;
  if (rel.reverse) out += ",REVERSE";
  out += ')';
  return out;
}

std::string dump_corpus(const Corpus &corpus) {
  using nlohmann::json;
  std::string out;
  for (const Document &doc : corpus.documents) {
    json entities = json::array();
    for (const EntitySpan &span : doc.entities) {
      entities.push_back({{"id", span.entity_id},
                          {"start", span.start_char},
                          {"end", span.end_char},
                          {"in_title", span.in_title},
                          {"surface", span.surface}});
    }
    json rec = {{"type", "document"},
                {"source", source_tag_name(corpus.source_tag)},
                {"doc_id", doc.doc_id},
                {"title", doc.title},
                {"abstract", doc.abstract},
                {"entities", entities}};
    out += rec.dump();
    out += '\n';
  }
  for (const RelationRecord &rel : corpus.relations) {
    json rec = {{"type", "relation"},
                {"label", rel.label ? json(std::string(relation_name(*rel.label)))
                                    : json(nullptr)},
                {"arg1", rel.arg1_id},
                {"arg2", rel.arg2_id},
                {"reverse", rel.reverse}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Corpus load_corpus(const std::filesystem::path &text_path,
                   const std::filesystem::path &relations_path,
                   SourceTag tag) {
  Corpus corpus;
  corpus.source_tag = tag;
  const std::string text = read_file(text_path);
  const std::string relations = read_file(relations_path);
  try {
    corpus.documents = parse_documents(text);
  } catch (const ParseError &e) {
    throw ParseError(text_path.string() + ": " + e.what());
  }
  try {
    corpus.relations = parse_relations(relations);
  } catch (const ParseError &e) {
    throw ParseError(relations_path.string() + ": " + e.what());
  }
  return corpus;
}

}  // namespace relpcnn
