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

#ifndef RELPCNN_EVAL_H_
#define RELPCNN_EVAL_H_

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relpcnn/labels.h"
#include "relpcnn/model.h"
#include "relpcnn/preprocess.h"

namespace relpcnn {

// Which classes the macro average runs over: all six, or only those with
// gold support.
enum class MacroOver { kAll, kPresent };

std::optional<MacroOver> parse_macro_over(std::string_view name);

struct ClassScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold count
};

struct ScoreReport {
  std::array<ClassScore, kNumRelations> per_class{};
  double macro_f1 = 0.0;
  double micro_accuracy = 0.0;
  // confusion[gold][pred]
  std::array<std::array<std::size_t, kNumRelations>, kNumRelations> confusion{};
  std::size_t total = 0;
  MacroOver macro_over = MacroOver::kAll;
};

// Per-class precision, recall and F1 with 0 for every zero denominator.
// Labels are class indices; throws ConfigError on a length mismatch or an
// index outside [0, 6).
ScoreReport score(std::span<const int> gold, std::span<const int> pred,
                  MacroOver macro_over = MacroOver::kAll);
ScoreReport score(std::span<const Relation> gold, std::span<const Relation> pred,
                  MacroOver macro_over = MacroOver::kAll);

std::string report_to_json(const ScoreReport &report);
std::string report_to_text(const ScoreReport &report);

// LABEL(arg1,arg2) with ",REVERSE" for reversed instances.
std::string format_prediction(const RelationInstance &instance, Relation label);

// Writes one prediction line per instance. Throws LoadError on I/O failure.
void emit_predictions(std::span<const RelationInstance> instances,
                      const ModelParams<float> &params, const ModelConfig &cfg,
                      const std::filesystem::path &path);

// One line of the results table.
struct ResultRow {
  std::string task;  // "1.1" or "1.2"
  std::string data;  // "1.1", "1.2" or "1.1 + 1.2"
  int epochs = 0;
  int batch_size = 0;
  int n_filters = 0;
  double macro_f1 = 0.0;  // fraction in [0, 1]
};

// Published macro-F1 (in percent) for a task/data pair, if there is one.
std::optional<double> reference_macro_f1(std::string_view task,
                                         std::string_view data);

// Fixed-width table: task, data, epochs, batch size, filters, macro-F1 (in
// percent) and the published reference value.
std::string report_table(std::span<const ResultRow> rows);

}  // namespace relpcnn

#endif  // RELPCNN_EVAL_H_
