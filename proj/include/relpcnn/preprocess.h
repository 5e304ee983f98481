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

#ifndef RELPCNN_PREPROCESS_H_
#define RELPCNN_PREPROCESS_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relpcnn/corpus.h"
#include "relpcnn/labels.h"
#include "relpcnn/vocabulary.h"

namespace relpcnn {

struct PreprocessConfig {
  int max_seq_len = 200;
  int position_window = 30;
  bool lowercase = true;
  std::string number_token = "<num>";

  // Appends one message per violated constraint.
  void validate(std::vector<std::string> *errors) const;
};

// Tokens of one segment. Offsets are in Unicode scalar values of whichever
// text was tokenized: the cleaned text for tokenize(), the raw segment for
// segment_text().
struct TokenizedSegment {
  std::vector<std::string> tokens;
  // Token containing each character, or -1 for characters in no token.
  std::vector<int> char_to_token;
  // Offset of the first character of each token.
  std::vector<std::size_t> token_offsets;
};

// Removes punctuation (hyphens between two word characters survive),
// replaces purely numeric tokens with cfg.number_token, optionally
// lowercases, and joins the surviving tokens with single spaces.
std::string clean(std::string_view text, const PreprocessConfig &cfg);

// Whitespace tokenization of already cleaned text.
TokenizedSegment tokenize(std::string_view cleaned);

// clean() followed by tokenize(), with offsets referring to the raw text.
TokenizedSegment segment_text(std::string_view raw, const PreprocessConfig &cfg);

// Token index of the first token of the mention. If cleaning deleted the
// mention's first character, the next token starting inside the mention is
// used. Throws InstanceError if the mention has no token.
int head_position(const TokenizedSegment &segment, const EntitySpan &span);

// out[i] = clamp(i - p, -window, window). Throws InstanceError if p is out
// of range.
std::vector<int> relative_positions(int length, int p, int window);

enum class Direction { kForward = 0, kReverse = 1 };

struct RelationInstance {
  std::vector<int> token_ids;  // length max_seq_len, PAD after real_length
  int p1 = 0;
  int p2 = 0;
  std::vector<int> rel_pos1;  // length max_seq_len
  std::vector<int> rel_pos2;
  Direction direction = Direction::kForward;
  std::optional<Relation> label;
  int real_length = 0;

  // Bookkeeping for prediction files and inspection.
  std::string arg1_id;
  std::string arg2_id;
  std::vector<std::string> tokens;  // the kept window, length real_length

  bool operator==(const RelationInstance &) const = default;
};

// Builds one instance from the segment both entities live in. Segments
// longer than max_seq_len are cut to the window of max_seq_len tokens
// centred on the midpoint of the two heads, shifted to stay in bounds.
// Throws InstanceError when the heads coincide or are too far apart.
RelationInstance build_instance(const Document &doc, const EntitySpan &e1,
                                const EntitySpan &e2, const RelationRecord &rel,
                                const Vocabulary &vocab,
                                const PreprocessConfig &cfg);

struct InstanceFailure {
  const RelationRecord *rel = nullptr;
  std::string reason;
};

struct InstanceSet {
  std::vector<RelationInstance> instances;
  std::vector<InstanceFailure> failures;
  // For each resolved relation, its index in `instances` or -1.
  std::vector<int> instance_of;
};

InstanceSet build_instances(const std::vector<ResolvedRelation> &relations,
                            const Vocabulary &vocab, const PreprocessConfig &cfg);

// One JSON object describing the instance, without a trailing newline.
std::string instance_to_json(const RelationInstance &instance);

}  // namespace relpcnn

#endif  // RELPCNN_PREPROCESS_H_
