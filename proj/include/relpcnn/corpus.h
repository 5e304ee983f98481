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

#ifndef RELPCNN_CORPUS_H_
#define RELPCNN_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relpcnn/labels.h"

namespace relpcnn {

// Markup vocabulary of the entity-annotated text files. Everything the
// parser knows about the file grammar lives here.
struct MarkupGrammar {
  static constexpr std::string_view kTextOpen = "<text id=\"";
  static constexpr std::string_view kTextClose = "</text>";
  static constexpr std::string_view kTitleOpen = "<title>";
  static constexpr std::string_view kTitleClose = "</title>";
  static constexpr std::string_view kAbstractOpen = "<abstract>";
  static constexpr std::string_view kAbstractClose = "</abstract>";
  static constexpr std::string_view kEntityOpen = "<entity id=\"";
  static constexpr std::string_view kEntityClose = "</entity>";
  static constexpr std::string_view kAttrEnd = "\">";
};

// An entity mention. Offsets count Unicode scalar values in the stripped
// text of the segment (title or abstract) that contains the mention.
struct EntitySpan {
  std::string entity_id;
  std::size_t start_char = 0;
  std::size_t end_char = 0;  // exclusive
  bool in_title = false;
  std::string surface;

  bool operator==(const EntitySpan &) const = default;
};

struct Document {
  std::string doc_id;
  std::string title;     // entity tags stripped
  std::string abstract;  // entity tags stripped
  std::vector<EntitySpan> entities;

  const std::string &segment(bool in_title) const {
    return in_title ? title : abstract;
  }
  const EntitySpan *find_entity(std::string_view id) const;

  bool operator==(const Document &) const = default;
};

// One line of a relations file. Unlabeled lines ("(a,b)") are accepted so
// that test-time candidate files parse with the same reader.
struct RelationRecord {
  std::optional<Relation> label;
  std::string arg1_id;
  std::string arg2_id;
  bool reverse = false;
  std::size_t line = 0;  // 1-based source line, 0 when synthesized

  bool operator==(const RelationRecord &other) const {
    return label == other.label && arg1_id == other.arg1_id &&
           arg2_id == other.arg2_id && reverse == other.reverse;
  }
};

enum class SourceTag { kTask11, kTask12, kMerged };

std::string_view source_tag_name(SourceTag tag);
std::optional<SourceTag> parse_source_tag(std::string_view name);

struct Corpus {
  std::vector<Document> documents;
  std::vector<RelationRecord> relations;
  SourceTag source_tag = SourceTag::kTask11;
};

// A relation joined with its document and argument spans. Pointers refer
// into the Corpus passed to resolve() and share its lifetime.
struct ResolvedRelation {
  const Document *doc = nullptr;
  const EntitySpan *e1 = nullptr;
  const EntitySpan *e2 = nullptr;
  const RelationRecord *rel = nullptr;
};

// Parses <text id="..."> records with <title> and <abstract> children and
// single-level <entity id="..."> markup. Throws ParseError naming the
// document id and byte offset.
std::vector<Document> parse_documents(std::string_view raw_text);

// Parses LABEL(id1,id2) and LABEL(id1,id2,REVERSE) lines. Blank lines are
// skipped. Throws ParseError with the line number.
std::vector<RelationRecord> parse_relations(std::string_view raw_text);

// Throws ResolveError for dangling ids, self relations, and pairs that
// straddle documents or the title/abstract boundary.
std::vector<ResolvedRelation> resolve(const Corpus &corpus);

// Counts labeled relations per class.
LabelCounts class_histogram(const Corpus &corpus);

// Re-inserts entity markup into one segment of a document.
std::string render_segment_markup(const Document &doc, bool in_title);

// Formats a relation in the input line format.
std::string format_relation(const RelationRecord &rel);

// One JSON object per line: documents first, then relations.
std::string dump_corpus(const Corpus &corpus);

std::string read_file(const std::filesystem::path &path);

// Reads and parses a text/relations file pair. Parse errors are prefixed
// with the offending path.
Corpus load_corpus(const std::filesystem::path &text_path,
                   const std::filesystem::path &relations_path,
                   SourceTag tag);

}  // namespace relpcnn

#endif  // RELPCNN_CORPUS_H_
