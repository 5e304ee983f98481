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

#include "relpcnn/eval.h"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "relpcnn/errors.h"

namespace relpcnn {

namespace {

double Ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

struct Reference {
  std::string_view task;
  std::string_view data;
  double macro_f1;
};

// Best systems on the official test set, with and without mixing in the
// sibling subtask's data.
constexpr Reference kReferences[] = {
    {"1.1", "1.1", 35.3},
    {"1.1", "1.1 + 1.2", 48.1},
    {"1.2", "1.2", 64.4},
    {"1.2", "1.1 + 1.2", 74.7},
};

}  // namespace

std::optional<MacroOver> parse_macro_over(std::string_view name) {
  if (name == "all") return MacroOver::kAll;
  if (name == "present") return MacroOver::kPresent;
  return std::nullopt;
}

ScoreReport score(std::span<const int> gold, std::span<const int> pred,
                  MacroOver macro_over) {
  if (gold.size() != pred.size()) {
    throw ConfigError("score: " + std::to_string(gold.size()) + " gold labels but " +
                      std::to_string(pred.size()) + " predictions");
  }
  ScoreReport report;
  report.macro_over = macro_over;
  report.total = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (int label : {gold[i], pred[i]}) {
      if (label < 0 || label >= kNumRelations) {
        throw ConfigError("score: unknown label index " + std::to_string(label));
      }
    }
    ++report.confusion[gold[i]][pred[i]];
  }

  std::size_t correct = 0;
  double f1_sum = 0.0;
  int averaged = 0;
  for (int c = 0; c < kNumRelations; ++c) {
    std::size_t tp = report.confusion[c][c];
    std::size_t gold_c = 0, pred_c = 0;
    for (int k = 0; k < kNumRelations; ++k) {
      gold_c += report.confusion[c][k];
      pred_c += report.confusion[k][c];
    }
    ClassScore &s = report.per_class[c];
    s.support = gold_c;
    s.precision = Ratio(tp, pred_c);
    s.recall = Ratio(tp, gold_c);
    const double pr = s.precision + s.recall;
    s.f1 = pr == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / pr;
    correct += tp;
    if (macro_over == MacroOver::kAll || gold_c > 0) {
      f1_sum += s.f1;
      ++averaged;
    }
  }
  report.macro_f1 = averaged == 0 ? 0.0 : f1_sum / averaged;
  report.micro_accuracy = Ratio(correct, report.total);
  return report;
}

ScoreReport score(std::span<const Relation> gold, std::span<const Relation> pred,
                  MacroOver macro_over) {
  std::vector<int> g, p;
  for (Relation r : gold) g.push_back(relation_index(r));
  for (Relation r : pred) p.push_back(relation_index(r));
  return score(std::span<const int>(g), std::span<const int>(p), macro_over);
}

std::string report_to_json(const ScoreReport &report) {
  using nlohmann::json;
  json per_class = json::object();
  for (int c = 0; c < kNumRelations; ++c) {
    const ClassScore &s = report.per_class[c];
    per_class[std::string(kRelationNames[c])] = {{"precision", s.precision},
                                                 {"recall", s.recall},
                                                 {"f1", s.f1},
                                                 {"support", s.support}};
  }
  json confusion = json::array();
  for (const auto &row : report.confusion) confusion.push_back(row);
  json out = {{"macro_f1", report.macro_f1},
              {"micro_accuracy", report.micro_accuracy},
              {"macro_over", report.macro_over == MacroOver::kAll ? "all" : "present"},
              {"total", report.total},
              {"per_class", per_class},
              {"labels", kRelationNames},
              {"confusion", confusion}};
  return out.dump();
}

std::string report_to_text(const ScoreReport &report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(12) << "class" << std::right << std::setw(11)
      << "precision" << std::setw(9) << "recall" << std::setw(9) << "f1"
      << std::setw(9) << "support" << '\n';
  for (int c = 0; c < kNumRelations; ++c) {
    const ClassScore &s = report.per_class[c];
    out << std::left << std::setw(12) << kRelationNames[c] << std::right
        << std::setw(11) << s.precision << std::setw(9) << s.recall << std::setw(9)
        << s.f1 << std::setw(9) << s.support << '\n';
  }
  out << "macro-F1 (" << (report.macro_over == MacroOver::kAll ? "all" : "present")
      << ")  " << report.macro_f1 << '\n';
  out << "accuracy        " << report.micro_accuracy << "  (" << report.total
      << " instances)\n\nconfusion (rows gold, columns predicted)\n";
  out << std::setw(12) << "";
  for (int c = 0; c < kNumRelations; ++c) out << std::setw(11) << kRelationNames[c];
  out << '\n';
  for (int g = 0; g < kNumRelations; ++g) {
    out << std::left << std::setw(12) << kRelationNames[g] << std::right;
    for (int p = 0; p < kNumRelations; ++p) {
      out << std::setw(11) << report.confusion[g][p];
    }
    out << '\n';
  }
  return out.str();
}

std::string format_prediction(const RelationInstance &instance, Relation label) {
  RelationRecord rec;
  rec.label = label;
  rec.arg1_id = instance.arg1_id;
  rec.arg2_id = instance.arg2_id;
  rec.reverse = instance.direction == Direction::kReverse;
  return format_relation(rec);
}

void emit_predictions(std::span<const RelationInstance> instances,
                      const ModelParams<float> &params, const ModelConfig &cfg,
                      const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw LoadError("cannot write predictions to '" + path.string() + "'");
  for (const RelationInstance &inst : instances) {
    out << format_prediction(inst, predict(inst, params, cfg).label) << '\n';
  }
  if (!out) throw LoadError("failed writing predictions to '" + path.string() + "'");
}

std::optional<double> reference_macro_f1(std::string_view task,
                                         std::string_view data) {
  for (const Reference &r : kReferences) {
    if (r.task == task && r.data == data) return r.macro_f1;
  }
  return std::nullopt;
}

std::string report_table(std::span<const ResultRow> rows) {
  std::ostringstream out;
  const auto rule = std::string(78, '-');
  out << rule << '\n'
      << std::left << std::setw(6) << "Task" << std::setw(12) << "Data"
      << std::right << std::setw(7) << "Epoch" << std::setw(12) << "Batch Size"
      << std::setw(16) << "No. of Filters" << std::setw(11) << "Macro-F1"
      << std::setw(12) << "Reference" << '\n'
      << rule << '\n';
  out << std::fixed << std::setprecision(1);
  for (const ResultRow &row : rows) {
    out << std::left << std::setw(6) << row.task << std::setw(12) << row.data
        << std::right << std::setw(7) << row.epochs << std::setw(12)
        << row.batch_size << std::setw(16) << row.n_filters << std::setw(11)
        << 100.0 * row.macro_f1;
    if (auto ref = reference_macro_f1(row.task, row.data)) {
      out << std::setw(12) << *ref;
    } else {
      out << std::setw(12) << "-";
    }
    out << '\n';
  }
  out << rule << '\n';
  return out.str();
}

}  // namespace relpcnn
