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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles/oracles.h"
#include "relpcnn/corpus.h"
#include "relpcnn/errors.h"
#include "relpcnn/eval.h"
#include "testing/fixtures.h"

using namespace relpcnn;

namespace {

std::vector<int> RandomLabels(std::mt19937_64 &rng, std::size_t n, int k = kNumRelations) {
  std::uniform_int_distribution<int> dist(0, k - 1);
  std::vector<int> out(n);
  for (int &v : out) v = dist(rng);
  return out;
}

}  // namespace

TEST_SUITE("score") {
  TEST_CASE("hand example") {
    // A = USAGE (0), B = RESULT (1).
    const std::vector<int> gold = {0, 0, 1};
    const std::vector<int> pred = {0, 1, 1};
    const ScoreReport present = score(gold, pred, MacroOver::kPresent);
    CHECK(present.per_class[0].precision == 1.0);
    CHECK(present.per_class[0].recall == 0.5);
    CHECK(present.per_class[0].f1 == 2.0 / 3.0);
    CHECK(present.per_class[1].precision == 0.5);
    CHECK(present.per_class[1].recall == 1.0);
    CHECK(present.per_class[1].f1 == 2.0 / 3.0);
    CHECK(present.macro_f1 == 2.0 / 3.0);
    const ScoreReport all = score(gold, pred);
    CHECK(all.macro_f1 == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
  }

  TEST_CASE("perfect predictions over all six classes") {
    const std::vector<int> gold = {0, 1, 2, 3, 4, 5, 0, 0};
    const ScoreReport r = score(gold, gold);
    CHECK(r.macro_f1 == 1.0);
    CHECK(r.micro_accuracy == 1.0);
  }

  TEST_CASE("a gold class never predicted has F1 zero") {
    const std::vector<int> gold = {0, 1, 2, 3, 4, 5};
    const std::vector<int> pred = {0, 1, 2, 3, 4, 4};
    const ScoreReport r = score(gold, pred);
    CHECK(r.per_class[5].f1 == 0.0);
    CHECK(r.macro_f1 < 1.0);
  }

  TEST_CASE("matches the naive counting oracle") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 80)(rng);
      const auto gold = RandomLabels(rng, n);
      const auto pred = RandomLabels(rng, n);
      const ScoreReport r = score(gold, pred);
      const oracle::NaiveScores want = oracle::naive_score(gold, pred);
      for (int c = 0; c < kNumRelations; ++c) {
        CHECK(std::abs(r.per_class[c].precision - want.precision[c]) <= 1e-12);
        CHECK(std::abs(r.per_class[c].recall - want.recall[c]) <= 1e-12);
        CHECK(std::abs(r.per_class[c].f1 - want.f1[c]) <= 1e-12);
      }
      CHECK(std::abs(r.macro_f1 - want.macro_f1) <= 1e-12);
      CHECK(std::abs(r.micro_accuracy - want.accuracy) <= 1e-12);
    }
  }

  TEST_CASE("report invariants") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 60)(rng);
      auto gold = RandomLabels(rng, n);
      auto pred = RandomLabels(rng, n);
      const ScoreReport r = score(gold, pred);
      std::size_t cells = 0, trace = 0;
      double f1_sum = 0;
      for (int g = 0; g < kNumRelations; ++g) {
        for (int p = 0; p < kNumRelations; ++p) cells += r.confusion[g][p];
        trace += r.confusion[g][g];
        f1_sum += r.per_class[g].f1;
        for (double v : {r.per_class[g].precision, r.per_class[g].recall, r.per_class[g].f1}) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
      }
      CHECK(cells == n);
      CHECK(r.total == n);
      CHECK(r.micro_accuracy == static_cast<double>(trace) / n);
      CHECK(std::abs(r.macro_f1 - f1_sum / kNumRelations) <= 1e-12);

      // Joint permutation leaves everything unchanged.
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<int> g2(n), p2(n);
      for (std::size_t i = 0; i < n; ++i) {
        g2[i] = gold[order[i]];
        p2[i] = pred[order[i]];
      }
      const ScoreReport s = score(g2, p2);
      CHECK(s.confusion == r.confusion);
      CHECK(s.macro_f1 == r.macro_f1);
      CHECK(s.micro_accuracy == r.micro_accuracy);
    }
  }

  TEST_CASE("random guessing is right one time in k") {
    std::mt19937_64 rng(43);
    const std::size_t n = 60000;
    std::vector<int> gold(n);
    for (std::size_t i = 0; i < n; ++i) gold[i] = static_cast<int>(i % kNumRelations);
    const auto pred = RandomLabels(rng, n);
    const double p = 1.0 / kNumRelations;
    const double sigma = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(score(gold, pred).micro_accuracy - p) <= 3 * sigma);
  }

  TEST_CASE("errors") {
    const std::vector<int> a = {0, 1};
    const std::vector<int> b = {0};
    const std::vector<int> bad = {0, 6};
    CHECK_THROWS_AS(score(a, b), ConfigError);
    CHECK_THROWS_AS(score(a, bad), ConfigError);
  }

  TEST_CASE("macro-over names") {
    CHECK(parse_macro_over("all") == MacroOver::kAll);
    CHECK(parse_macro_over("present") == MacroOver::kPresent);
    CHECK_FALSE(parse_macro_over("weighted").has_value());
  }

  TEST_CASE("text and structured reports mention every class") {
    const std::vector<int> gold = {0, 1, 2};
    const ScoreReport r = score(gold, gold);
    const std::string text = report_to_text(r);
    const std::string json = report_to_json(r);
    for (auto name : kRelationNames) {
      CHECK(text.find(name) != std::string::npos);
      CHECK(json.find(name) != std::string::npos);
    }
  }
}

TEST_CASE("emitted predictions parse back as relations") {
  ModelConfig cfg;
  cfg.n_filters = 3;
  cfg.max_seq_len = 10;
  const auto params = init_params(cfg, testing::random_words<float>(20, 4, 1), 2);
  std::mt19937_64 rng(44);
  std::vector<RelationInstance> instances;
  for (int i = 0; i < 25; ++i) {
    auto inst = testing::random_instance(rng, 20, cfg.max_seq_len, cfg.position_window);
    inst.arg1_id = "P" + std::to_string(i) + ".1";
    inst.arg2_id = "P" + std::to_string(i) + ".2";
    instances.push_back(inst);
  }
  const auto path = std::filesystem::temp_directory_path() / "relpcnn_eval_test.txt";
  emit_predictions(instances, params, cfg, path);
  const auto records = parse_relations(read_file(path));
  std::filesystem::remove(path);
  REQUIRE(records.size() == instances.size());
  std::vector<int> labels;
  for (std::size_t i = 0; i < records.size(); ++i) {
    REQUIRE(records[i].label.has_value());
    CHECK(records[i].arg1_id == instances[i].arg1_id);
    CHECK(records[i].reverse == (instances[i].direction == Direction::kReverse));
    CHECK(*records[i].label == predict(instances[i], params, cfg).label);
    labels.push_back(relation_index(*records[i].label));
  }
  const ScoreReport self = score(labels, labels, MacroOver::kPresent);
  for (int c = 0; c < kNumRelations; ++c) {
    if (self.per_class[c].support) CHECK(self.per_class[c].f1 == 1.0);
  }
  CHECK_THROWS_AS(emit_predictions(instances, params, cfg, "/nonexistent/dir/out.txt"),
                  LoadError);
}

TEST_CASE("results table carries the published reference values") {
  CHECK(reference_macro_f1("1.1", "1.1") == 35.3);
  CHECK(reference_macro_f1("1.1", "1.1 + 1.2") == 48.1);
  CHECK(reference_macro_f1("1.2", "1.2") == 64.4);
  CHECK(reference_macro_f1("1.2", "1.1 + 1.2") == 74.7);
  CHECK_FALSE(reference_macro_f1("2", "2").has_value());
  const std::vector<ResultRow> rows = {{"1.2", "1.1 + 1.2", 100, 64, 128, 0.7}};
  const std::string table = report_table(rows);
  CHECK(table.find("74.7") != std::string::npos);
  CHECK(table.find("70.0") != std::string::npos);
  CHECK(table.find("128") != std::string::npos);
}
