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

#ifndef RELPCNN_TRAINER_H_
#define RELPCNN_TRAINER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "relpcnn/corpus.h"
#include "relpcnn/embeddings.h"
#include "relpcnn/eval.h"
#include "relpcnn/model.h"
#include "relpcnn/preprocess.h"

namespace relpcnn {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 0.001;
  int max_seq_len = 200;
  int n_filters = 64;
  std::uint64_t seed = 1;
  bool augment = false;

  void validate(std::vector<std::string> *errors) const;
  std::string to_json() const;

  bool operator==(const TrainConfig &) const = default;
};

// The model configuration with the searched fields taken from `train`.
ModelConfig with_train_config(const ModelConfig &base, const TrainConfig &train);

// Merges two corpora for training. Document and entity ids are prefixed
// with "<source tag>:" so the two sources cannot collide; relation records
// are rewritten to match. Throws ResolveError if ids still collide.
Corpus augment(const Corpus &primary, const Corpus &other);

// Strips the "<source tag>:" prefix added by augment().
std::string strip_namespace(const std::string &id);

struct TrainLog {
  double initial_loss = 0.0;         // inference-mode loss before training
  std::vector<double> epoch_loss;    // mean training-mode loss per epoch
};

template <typename T>
struct TrainResult {
  ModelParams<T> params;
  TrainLog log;
};

// Mini-batch Adam. Each epoch visits a seeded permutation of the data in
// batches of batch_size (the last batch may be smaller). Deterministic for
// a fixed seed. Throws ConfigError for an empty training set.
template <typename T>
TrainResult<T> train(std::span<const RelationInstance> data, const TrainConfig &cfg,
                     const ModelConfig &model_cfg, const EmbeddingTable<T> &words);

// The hyperparameter grid. Defaults are the full search space.
struct Grid {
  std::vector<int> epochs = {100, 200, 400};
  std::vector<int> max_seq_lens = {100, 200};
  std::vector<int> batch_sizes = {32, 64};
  std::vector<int> n_filters = {32, 64, 128};
  std::vector<double> learning_rates = {0.001, 0.0005};

  std::size_t size() const {
    return epochs.size() * max_seq_lens.size() * batch_sizes.size() *
           n_filters.size() * learning_rates.size();
  }
  // Cartesian product, epochs varying slowest and learning rate fastest.
  // Trial k gets seed (seed XOR k).
  std::vector<TrainConfig> enumerate(std::uint64_t seed, bool augment) const;
};

struct TrialResult {
  std::size_t index = 0;
  TrainConfig config;
  double macro_f1 = 0.0;  // mean over repeats
  std::vector<double> repeat_f1;
  std::vector<double> epoch_loss;  // from the first repeat
  std::string checkpoint;          // empty unless the caller saved one
};

struct GridResult {
  std::vector<TrialResult> trials;
  std::size_t best = 0;

  const TrialResult &best_trial() const { return trials.at(best); }
};

// Builds instances for a given max_seq_len.
using InstanceProvider = std::function<std::vector<RelationInstance>(int)>;

struct GridOptions {
  int parallelism = 1;
  int repeats = 1;
  MacroOver macro_over = MacroOver::kAll;
  // Called once per finished trial, serialized.
  std::function<void(const TrialResult &)> on_trial;
};

// Highest macro-F1 wins; ties go to fewer epochs, then fewer filters, then
// the earlier trial.
std::size_t select_best(const std::vector<TrialResult> &trials);

// Macro-F1 of the model's predictions on labeled instances.
double validation_macro_f1(std::span<const RelationInstance> instances,
                           const ModelParams<float> &params, const ModelConfig &cfg,
                           MacroOver macro_over);

// Trains and scores one configuration. Repeat r > 0 uses seed
// derive_seed(cfg.seed, r).
TrialResult run_trial(std::size_t index, const TrainConfig &cfg,
                      std::span<const RelationInstance> train_set,
                      std::span<const RelationInstance> validation,
                      const ModelConfig &model_cfg, const EmbeddingTable<float> &words,
                      int repeats, MacroOver macro_over);

// Runs every configuration of the grid, optionally on several threads.
// Throws ConfigError for an empty grid.
GridResult grid_search(const InstanceProvider &train_set,
                       const InstanceProvider &validation, const Grid &grid,
                       std::uint64_t seed, bool augment, const ModelConfig &model_cfg,
                       const EmbeddingTable<float> &words, const GridOptions &options);

// Retrains the chosen configuration on the union of all parts.
TrainResult<float> final_fit(const std::vector<InstanceProvider> &parts,
                             const TrainConfig &cfg, const ModelConfig &model_cfg,
                             const EmbeddingTable<float> &words);

}  // namespace relpcnn

#endif  // RELPCNN_TRAINER_H_
