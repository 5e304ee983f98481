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

#ifndef RELPCNN_LABELS_H_
#define RELPCNN_LABELS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace relpcnn {

// The six semantic relation classes. The numeric value is the class index
// used by the classifier head.
enum class Relation : int {
  kUsage = 0,
  kResult = 1,
  kModel = 2,
  kPartWhole = 3,
  kTopic = 4,
  kComparison = 5,
};

inline constexpr int kNumRelations = 6;

inline constexpr std::array<std::string_view, kNumRelations> kRelationNames = {
    "USAGE", "RESULT", "MODEL", "PART_WHOLE", "TOPIC", "COMPARISON"};

using LabelCounts = std::array<std::size_t, kNumRelations>;

inline std::string_view relation_name(Relation r) {
  return kRelationNames[static_cast<int>(r)];
}

inline int relation_index(Relation r) { return static_cast<int>(r); }

inline Relation relation_from_index(int index) {
  return static_cast<Relation>(index);
}

inline std::optional<Relation> parse_relation_name(std::string_view name) {
  for (int i = 0; i < kNumRelations; ++i) {
    if (kRelationNames[i] == name) return static_cast<Relation>(i);
  }
  return std::nullopt;
}

}  // namespace relpcnn

#endif  // RELPCNN_LABELS_H_
