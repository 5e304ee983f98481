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

#ifndef RELPCNN_TESTS_TESTING_FIXTURES_H_
#define RELPCNN_TESTS_TESTING_FIXTURES_H_

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "relpcnn/embeddings.h"
#include "relpcnn/model.h"
#include "relpcnn/preprocess.h"

namespace testing {

// Random instance over a vocabulary of `vocab_size` ids. Ids 0 and 1 (PAD,
// UNK) are only used as padding.
inline relpcnn::RelationInstance random_instance(std::mt19937_64 &rng, int vocab_size,
                                                 int max_len, int window,
                                                 int min_len = 2) {
  std::uniform_int_distribution<int> len_dist(std::max(2, min_len), max_len);
  std::uniform_int_distribution<int> tok(2, vocab_size - 1);
  relpcnn::RelationInstance inst;
  inst.real_length = len_dist(rng);
  std::uniform_int_distribution<int> pos(0, inst.real_length - 1);
  inst.p1 = pos(rng);
  do {
    inst.p2 = pos(rng);
  } while (inst.p2 == inst.p1);
  inst.token_ids.assign(max_len, relpcnn::Vocabulary::kPad);
  for (int i = 0; i < inst.real_length; ++i) inst.token_ids[i] = tok(rng);
  for (int i = 0; i < max_len; ++i) {
    inst.rel_pos1.push_back(std::clamp(i - inst.p1, -window, window));
    inst.rel_pos2.push_back(std::clamp(i - inst.p2, -window, window));
  }
  inst.direction = std::bernoulli_distribution(0.5)(rng) ? relpcnn::Direction::kReverse
                                                         : relpcnn::Direction::kForward;
  inst.label = relpcnn::relation_from_index(
      std::uniform_int_distribution<int>(0, relpcnn::kNumRelations - 1)(rng));
  inst.arg1_id = "D.1";
  inst.arg2_id = "D.2";
  return inst;
}

// Labeled instances whose class is signalled by the token at the first
// entity head: id 2 + label. Separable by construction.
inline std::vector<relpcnn::RelationInstance> separable_instances(
    std::uint64_t seed, int count, int vocab_size, int max_len, int window) {
  std::mt19937_64 rng(seed);
  std::vector<relpcnn::RelationInstance> out;
  for (int i = 0; i < count; ++i) {
    auto inst = random_instance(rng, vocab_size, max_len, window, 4);
    const int label = i % relpcnn::kNumRelations;
    inst.label = relpcnn::relation_from_index(label);
    for (int k = 0; k < inst.real_length; ++k) {
      if (inst.token_ids[k] < 2 + relpcnn::kNumRelations) {
        inst.token_ids[k] += relpcnn::kNumRelations;
      }
    }
    inst.token_ids[inst.p1] = 2 + label;
    inst.arg1_id = "S" + std::to_string(i) + ".1";
    inst.arg2_id = "S" + std::to_string(i) + ".2";
    out.push_back(std::move(inst));
  }
  return out;
}

// The small configuration used for whole-model gradient checks: vocabulary
// 10, word dim 4, two filters per width, sequences of 7.
inline relpcnn::ModelConfig tiny_config() {
  relpcnn::ModelConfig cfg;
  cfg.n_filters = 2;
  cfg.max_seq_len = 7;
  cfg.position_window = 30;
  return cfg;
}

template <typename T>
relpcnn::EmbeddingTable<T> random_words(std::size_t vocab, std::size_t dim,
                                        std::uint64_t seed) {
  auto table = relpcnn::random_table<T>(vocab, dim, seed);
  std::fill(table.matrix.row(relpcnn::Vocabulary::kPad).begin(),
            table.matrix.row(relpcnn::Vocabulary::kPad).end(), T(0));
  table.frozen_row = relpcnn::Vocabulary::kPad;
  return table;
}

}  // namespace testing

#endif  // RELPCNN_TESTS_TESTING_FIXTURES_H_
