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

#include "relpcnn/vocabulary.h"

#include "relpcnn/errors.h"

namespace relpcnn {

Vocabulary::Vocabulary() {
  add(kPadToken);
  add(kUnkToken);
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string> &tokens) {
  if (tokens.size() < 2 || tokens[kPad] != kPadToken ||
      tokens[kUnk] != kUnkToken) {
    throw LoadError("vocabulary must start with " + std::string(kPadToken) +
                    " and " + std::string(kUnkToken));
  }
  Vocabulary vocab;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (vocab.add(tokens[i]) != static_cast<int>(i)) {
      throw LoadError("duplicate vocabulary token '" + tokens[i] + "'");
    }
  }
  return vocab;
}

int Vocabulary::add(std::string_view token) {
  auto [it, inserted] =
      ids_.emplace(std::string(token), static_cast<int>(tokens_.size()));
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0;
}

}  // namespace relpcnn
