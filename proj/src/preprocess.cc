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

#include "relpcnn/preprocess.h"

#include <algorithm>
#include <cstdlib>

#include "json.hpp"
#include "relpcnn/errors.h"
#include "relpcnn/utf8.h"

namespace relpcnn {

namespace {

bool IsAsciiAlnum(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') ||
         (c >= U'A' && c <= U'Z');
}

// Letters and digits. Outside ASCII, everything except the Latin-1
// punctuation block, general punctuation, symbol and arrow blocks and CJK
// punctuation counts as a word character.
bool IsWordChar(char32_t c) {
  if (c < 0x80) return IsAsciiAlnum(c);
  if (c < 0xC0 || c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2000 && c <= 0x2BFF) return false;
  if (c >= 0x3000 && c <= 0x303F) return false;
  if (c == 0xFEFF) return false;
  return true;
}

bool IsSpace(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == 0xA0;
}

char32_t ToLower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;  // Latin-1
  if (c >= 0x391 && c <= 0x3A9) return c + 32;              // Greek
  return c;
}

bool AllDigits(std::u32string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char32_t c) { return c >= U'0' && c <= U'9'; });
}

}  // namespace

void PreprocessConfig::validate(std::vector<std::string> *errors) const {
  if (max_seq_len <= 0) errors->push_back("max_seq_len must be positive");
  if (position_window <= 0) errors->push_back("position_window must be positive");
  if (number_token.empty() ||
      std::any_of(number_token.begin(), number_token.end(),
                  [](char c) { return c == ' ' || c == '\t' || c == '\n'; })) {
    errors->push_back("number_token must be a non-empty token without spaces");
  }
}

TokenizedSegment segment_text(std::string_view raw, const PreprocessConfig &cfg) {
  const std::u32string text = utf8::decode(raw);
  const std::size_t n = text.size();
  std::vector<bool> kept(n);
  for (std::size_t i = 0; i < n; ++i) {
    kept[i] = IsWordChar(text[i]) ||
              (text[i] == U'-' && i > 0 && i + 1 < n && IsWordChar(text[i - 1]) &&
               IsWordChar(text[i + 1]));
  }
  TokenizedSegment seg;
  seg.char_to_token.assign(n, -1);
  std::size_t i = 0;
  while (i < n) {
    if (!kept[i]) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < n && kept[end]) ++end;
    const int index = static_cast<int>(seg.tokens.size());
    std::u32string_view word(text.data() + i, end - i);
    if (AllDigits(word)) {
      seg.tokens.push_back(cfg.number_token);
    } else {
      std::string token;
      for (char32_t c : word) utf8::append(token, cfg.lowercase ? ToLower(c) : c);
      seg.tokens.push_back(std::move(token));
    }
    seg.token_offsets.push_back(i);
    for (std::size_t k = i; k < end; ++k) seg.char_to_token[k] = index;
    i = end;
  }
  return seg;
}

std::string clean(std::string_view text, const PreprocessConfig &cfg) {
  const TokenizedSegment seg = segment_text(text, cfg);
  std::string out;
  for (const std::string &token : seg.tokens) {
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

TokenizedSegment tokenize(std::string_view cleaned) {
  const std::u32string text = utf8::decode(cleaned);
  TokenizedSegment seg;
  seg.char_to_token.assign(text.size(), -1);
  std::size_t i = 0;
  while (i < text.size()) {
    if (IsSpace(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < text.size() && !IsSpace(text[end])) ++end;
    const int index = static_cast<int>(seg.tokens.size());
    seg.tokens.push_back(utf8::encode(std::u32string_view(text.data() + i, end - i)));
    seg.token_offsets.push_back(i);
    for (std::size_t k = i; k < end; ++k) seg.char_to_token[k] = index;
    i = end;
  }
  return seg;
}

int head_position(const TokenizedSegment &segment, const EntitySpan &span) {
  const std::size_t start = span.start_char;
  if (start < segment.char_to_token.size() && segment.char_to_token[start] >= 0) {
    return segment.char_to_token[start];
  }
  for (std::size_t k = 0; k < segment.token_offsets.size(); ++k) {
    const std::size_t offset = segment.token_offsets[k];
    if (offset > start && offset < span.end_char) return static_cast<int>(k);
    if (offset >= span.end_char) break;
  }
  throw InstanceError("entity '" + span.entity_id + "' (\"" + span.surface +
                      "\") has no token after cleaning");
}

std::vector<int> relative_positions(int length, int p, int window) {
  if (p < 0 || p >= length) {
    throw InstanceError("position " + std::to_string(p) + " outside sequence of " +
                        std::to_string(length));
  }
  if (window <= 0) throw ConfigError("position window must be positive");
  std::vector<int> out(length);
  for (int i = 0; i < length; ++i) out[i] = std::clamp(i - p, -window, window);
  return out;
}

RelationInstance build_instance(const Document &doc, const EntitySpan &e1,
                                const EntitySpan &e2, const RelationRecord &rel,
                                const Vocabulary &vocab,
                                const PreprocessConfig &cfg) {
  if (e1.in_title != e2.in_title) {
    throw InstanceError("entities '" + e1.entity_id + "' and '" + e2.entity_id +
                        "' are in different segments");
  }
  const TokenizedSegment seg = segment_text(doc.segment(e1.in_title), cfg);
  const int head1 = head_position(seg, e1);
  const int head2 = head_position(seg, e2);
  if (head1 == head2) {
    throw InstanceError("entities '" + e1.entity_id + "' and '" + e2.entity_id +
                        "' share head token " + std::to_string(head1));
  }
  const int max_len = cfg.max_seq_len;
  if (std::abs(head1 - head2) >= max_len) {
    throw InstanceError("entities '" + e1.entity_id + "' and '" + e2.entity_id +
                        "' are " + std::to_string(std::abs(head1 - head2)) +
                        " tokens apart, max_seq_len is " + std::to_string(max_len));
  }

  const int n = static_cast<int>(seg.tokens.size());
  const int len = std::min(n, max_len);
  int start = 0;
  if (n > max_len) {
    const int lo = std::min(head1, head2);
    const int hi = std::max(head1, head2);
    start = (lo + hi) / 2 - max_len / 2;
    start = std::clamp(start, hi - max_len + 1, lo);
    start = std::clamp(start, 0, n - max_len);
  }

  RelationInstance inst;
  inst.real_length = len;
  inst.p1 = head1 - start;
  inst.p2 = head2 - start;
  inst.token_ids.assign(max_len, Vocabulary::kPad);
  inst.tokens.assign(seg.tokens.begin() + start, seg.tokens.begin() + start + len);
  for (int i = 0; i < len; ++i) inst.token_ids[i] = vocab.id(inst.tokens[i]);
  inst.rel_pos1 = relative_positions(max_len, inst.p1, cfg.position_window);
  inst.rel_pos2 = relative_positions(max_len, inst.p2, cfg.position_window);
  inst.direction = rel.reverse ? Direction::kReverse : Direction::kForward;
  inst.label = rel.label;
  inst.arg1_id = rel.arg1_id;
  inst.arg2_id = rel.arg2_id;
  return inst;
}

InstanceSet build_instances(const std::vector<ResolvedRelation> &relations,
                            const Vocabulary &vocab, const PreprocessConfig &cfg) {
  InstanceSet set;
  set.instance_of.reserve(relations.size());
  for (const ResolvedRelation &r : relations) {
    try {
      set.instances.push_back(build_instance(*r.doc, *r.e1, *r.e2, *r.rel, vocab, cfg));
      set.instance_of.push_back(static_cast<int>(set.instances.size()) - 1);
    } catch (const InstanceError &e) {
      set.failures.push_back(InstanceFailure{r.rel, e.what()});
      set.instance_of.push_back(-1);
    }
  }
  return set;
}

std::string instance_to_json(const RelationInstance &inst) {
  using nlohmann::json;
  const auto real = [&](const std::vector<int> &v) {
    return std::vector<int>(v.begin(), v.begin() + inst.real_length);
  };
  json rec = {
      {"arg1", inst.arg1_id},
      {"arg2", inst.arg2_id},
      {"label", inst.label ? json(std::string(relation_name(*inst.label)))
                           : json(nullptr)},
      {"direction", inst.direction == Direction::kReverse ? "REVERSE" : "FORWARD"},
      {"p1", inst.p1},
      {"p2", inst.p2},
      {"real_length", inst.real_length},
      {"tokens", inst.tokens},
      {"token_ids", real(inst.token_ids)},
      {"rel_pos1", real(inst.rel_pos1)},
      {"rel_pos2", real(inst.rel_pos2)},
  };
  return rec.dump();
}

}  // namespace relpcnn
