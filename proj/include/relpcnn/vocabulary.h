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

#ifndef RELPCNN_VOCABULARY_H_
#define RELPCNN_VOCABULARY_H_

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace relpcnn {

// Dense token <-> id map. Ids 0 and 1 are always PAD and UNK.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  // Rebuilds a vocabulary from its token list, e.g. from a checkpoint. The
  // list must start with the PAD and UNK tokens.
  static Vocabulary from_tokens(const std::vector<std::string> &tokens);

  // Returns the id of `token`, adding it if needed.
  int add(std::string_view token);

  // Returns kUnk for unknown tokens.
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;

  const std::string &token(int id) const { return tokens_.at(id); }
  const std::vector<std::string> &tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

  bool operator==(const Vocabulary &other) const {
    return tokens_ == other.tokens_;
  }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> tokens_;
};

}  // namespace relpcnn

#endif  // RELPCNN_VOCABULARY_H_
