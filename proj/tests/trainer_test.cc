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
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "relpcnn/corpus.h"
#include "relpcnn/errors.h"
#include "relpcnn/trainer.h"
#include "testing/fixtures.h"

using namespace relpcnn;

namespace {

Corpus SmallCorpus(const std::string &id, SourceTag tag, const std::string &relations) {
  const std::string text =
      "<text id=\"" + id + "\"><title><entity id=\"" + id + ".1\">Parsing</entity> with " +
      "<entity id=\"" + id + ".2\">grammars</entity></title><abstract>We apply " +
      "<entity id=\"" + id + ".3\">features</entity> to <entity id=\"" + id +
      ".4\">trees</entity> and <entity id=\"" + id + ".5\">graphs</entity>.</abstract></text>";
  return Corpus{parse_documents(text), parse_relations(relations), tag};
}

std::vector<RelationInstance> Instances(const Corpus &corpus) {
  Vocabulary vocab;
  for (auto w : {"parsing", "grammars", "features", "trees"}) vocab.add(w);
  PreprocessConfig cfg;
  cfg.max_seq_len = 20;
  return build_instances(resolve(corpus), vocab, cfg).instances;
}

ModelConfig GridModel() {
  ModelConfig cfg;
  cfg.filter_widths = {3};
  return cfg;
}

// A grid with tiny filter counts and sequence lengths so a full run is fast.
Grid TinyGrid() {
  Grid g;
  g.epochs = {1, 2};
  g.max_seq_lens = {8, 10};
  g.batch_sizes = {4, 8};
  g.n_filters = {1, 2};
  g.learning_rates = {0.01, 0.005};
  return g;
}

InstanceProvider SeparableProvider(std::uint64_t seed, int count) {
  return [seed, count](int max_len) {
    return testing::separable_instances(seed, count, 20, max_len, 30);
  };
}

template <typename T>
std::vector<T> Flatten(ModelParams<T> params) {
  std::vector<T> out;
  for (auto &ref : params.named()) {
    out.insert(out.end(), ref.tensor->data().begin(), ref.tensor->data().end());
  }
  return out;
}

}  // namespace

TEST_SUITE("augment") {
  const Corpus kA = SmallCorpus("A", SourceTag::kTask11,
                                "USAGE(A.3,A.4)\nUSAGE(A.4,A.5,REVERSE)\nTOPIC(A.1,A.2)\n");
  const Corpus kB = SmallCorpus("B", SourceTag::kTask12, "MODEL(B.3,B.5)\nUSAGE(B.1,B.2)\n");

  TEST_CASE("counts and histograms add") {
    const Corpus merged = augment(kA, kB);
    CHECK(merged.source_tag == SourceTag::kMerged);
    CHECK(merged.documents.size() == kA.documents.size() + kB.documents.size());
    CHECK(merged.relations.size() == kA.relations.size() + kB.relations.size());
    const auto ha = class_histogram(kA), hb = class_histogram(kB), hm = class_histogram(merged);
    for (int c = 0; c < kNumRelations; ++c) CHECK(hm[c] == ha[c] + hb[c]);
    CHECK(resolve(merged).size() == merged.relations.size());
  }

  TEST_CASE("identical ids in both sources do not collide") {
    const Corpus a2 = SmallCorpus("A", SourceTag::kTask12, "RESULT(A.3,A.5)\n");
    const Corpus merged = augment(kA, a2);
    CHECK(merged.documents.size() == 2);
    CHECK(resolve(merged).size() == 4);
    CHECK(merged.documents[0].doc_id != merged.documents[1].doc_id);
    CHECK(strip_namespace(merged.documents[1].doc_id) == "A");
  }

  TEST_CASE("merging with an empty corpus is the identity up to namespacing") {
    const Corpus merged = augment(kA, Corpus{{}, {}, SourceTag::kTask12});
    REQUIRE(merged.documents.size() == kA.documents.size());
    CHECK(strip_namespace(merged.documents[0].doc_id) == kA.documents[0].doc_id);
    CHECK(merged.documents[0].abstract == kA.documents[0].abstract);
    REQUIRE(merged.relations.size() == kA.relations.size());
    for (std::size_t i = 0; i < kA.relations.size(); ++i) {
      CHECK(merged.relations[i].label == kA.relations[i].label);
      CHECK(strip_namespace(merged.relations[i].arg1_id) == kA.relations[i].arg1_id);
      CHECK(merged.relations[i].reverse == kA.relations[i].reverse);
    }
  }

  TEST_CASE("instances are unchanged by merging") {
    const auto parts = Instances(kA);
    auto rest = Instances(kB);
    auto merged = Instances(augment(kA, kB));
    std::vector<RelationInstance> expected = parts;
    expected.insert(expected.end(), rest.begin(), rest.end());
    REQUIRE(merged.size() == expected.size());
    for (std::size_t i = 0; i < merged.size(); ++i) {
      auto m = merged[i];
      m.arg1_id = strip_namespace(m.arg1_id);
      m.arg2_id = strip_namespace(m.arg2_id);
      CHECK(m == expected[i]);
    }
  }

  TEST_CASE("same source tag twice is a collision") {
    CHECK_THROWS_AS(augment(kA, kA), ResolveError);
  }
}

TEST_SUITE("train") {
  TEST_CASE("zero epochs returns the initialization") {
    const auto data = testing::separable_instances(1, 12, 20, 10, 30);
    TrainConfig tc;
    tc.epochs = 0;
    tc.max_seq_len = 10;
    tc.n_filters = 3;
    const auto words = testing::random_words<float>(20, 6, 1);
    const auto result = train<float>(data, tc, ModelConfig{}, words);
    const auto init = init_params(with_train_config(ModelConfig{}, tc), words,
                                  derive_seed(tc.seed, 0));
    CHECK(Flatten(result.params) == Flatten(init));
    CHECK(result.log.epoch_loss.empty());
  }

  TEST_CASE("same seed gives bit-identical parameters") {
    const auto data = testing::separable_instances(2, 30, 20, 10, 30);
    TrainConfig tc;
    tc.epochs = 5;
    tc.batch_size = 7;
    tc.max_seq_len = 10;
    tc.n_filters = 3;
    tc.seed = 77;
    const auto words = testing::random_words<float>(20, 6, 1);
    const auto a = train<float>(data, tc, ModelConfig{}, words);
    const auto b = train<float>(data, tc, ModelConfig{}, words);
    CHECK(Flatten(a.params) == Flatten(b.params));
    CHECK(a.log.epoch_loss == b.log.epoch_loss);
    tc.seed = 78;
    CHECK_FALSE(Flatten(train<float>(data, tc, ModelConfig{}, words).params) ==
                Flatten(a.params));
  }

  TEST_CASE("loss on separable data is non-increasing after the fifth epoch") {
    // Dropout resamples its mask every step, which makes the training-mode
    // loss noisy; the monotonicity property is checked without it.
    ModelConfig mc;
    mc.keep_prob = 1.0;
    for (int run = 0; run < 10; ++run) {
      const auto data = testing::separable_instances(100 + run, 60, 30, 12, 30);
      TrainConfig tc;
      tc.epochs = 30;
      tc.batch_size = 32;
      tc.max_seq_len = 12;
      tc.n_filters = 8;
      tc.seed = run;
      const auto result = train<float>(data, tc, mc, testing::random_words<float>(30, 10, run));
      const auto &loss = result.log.epoch_loss;
      REQUIRE(loss.size() == 30);
      for (std::size_t e = 5; e < loss.size(); ++e) {
        INFO("run " << run << " epoch " << e);
        CHECK(loss[e] <= loss[e - 1]);
      }
      CHECK(loss.back() < result.log.initial_loss);
    }
  }

  TEST_CASE("empty training set and bad configs are errors") {
    TrainConfig tc;
    CHECK_THROWS_AS(train<float>({}, tc, ModelConfig{}, testing::random_words<float>(5, 2, 1)),
                    ConfigError);
    tc.epochs = -1;
    tc.batch_size = 0;
    tc.learning_rate = -0.1;
    std::vector<std::string> errors;
    tc.validate(&errors);
    CHECK(errors.size() == 3);
  }
}

TEST_SUITE("grid") {
  TEST_CASE("the full grid has 72 distinct configurations") {
    const Grid grid;
    CHECK(grid.size() == 72);
    const auto configs = grid.enumerate(5, false);
    REQUIRE(configs.size() == 72);
    std::set<std::tuple<int, int, int, int, double>> seen;
    for (std::size_t k = 0; k < configs.size(); ++k) {
      const auto &c = configs[k];
      seen.insert({c.epochs, c.max_seq_len, c.batch_size, c.n_filters, c.learning_rate});
      CHECK(c.seed == (5 ^ k));
    }
    CHECK(seen.size() == 72);
    CHECK(configs.front().epochs == 100);
    CHECK(configs.back().epochs == 400);
    CHECK(configs[1].learning_rate == 0.0005);
  }

  TEST_CASE("selection prefers higher F1, then fewer epochs, then fewer filters") {
    auto trial = [](std::size_t i, double f1, int epochs, int filters) {
      TrialResult t;
      t.index = i;
      t.macro_f1 = f1;
      t.config.epochs = epochs;
      t.config.n_filters = filters;
      return t;
    };
    CHECK(select_best({trial(0, 0.4, 100, 32), trial(1, 0.5, 400, 128)}) == 1);
    CHECK(select_best({trial(0, 0.5, 400, 32), trial(1, 0.5, 100, 128)}) == 1);
    CHECK(select_best({trial(0, 0.5, 100, 128), trial(1, 0.5, 100, 32)}) == 1);
    CHECK(select_best({trial(0, 0.5, 100, 32), trial(1, 0.5, 100, 32)}) == 0);
  }

  TEST_CASE("a single-configuration grid selects it") {
    Grid g;
    g.epochs = {2};
    g.max_seq_lens = {8};
    g.batch_sizes = {4};
    g.n_filters = {2};
    g.learning_rates = {0.01};
    const auto result = grid_search(SeparableProvider(1, 12), SeparableProvider(2, 6), g, 3,
                                    false, GridModel(), testing::random_words<float>(20, 4, 1),
                                    GridOptions{});
    REQUIRE(result.trials.size() == 1);
    CHECK(result.best == 0);
    CHECK(result.best_trial().config.n_filters == 2);
  }

  TEST_CASE("trials are isolated and the grid is reproducible across thread counts") {
    const Grid g = TinyGrid();
    const auto words = testing::random_words<float>(20, 4, 1);
    GridOptions serial;
    GridOptions parallel;
    parallel.parallelism = 4;
    const auto a = grid_search(SeparableProvider(1, 16), SeparableProvider(2, 8), g, 9, false,
                               GridModel(), words, serial);
    const auto b = grid_search(SeparableProvider(1, 16), SeparableProvider(2, 8), g, 9, false,
                               GridModel(), words, parallel);
    REQUIRE(a.trials.size() == g.size());
    REQUIRE(b.trials.size() == g.size());
    CHECK(a.best == b.best);
    for (std::size_t k = 0; k < a.trials.size(); ++k) {
      CHECK(a.trials[k].index == k);
      CHECK(a.trials[k].macro_f1 == b.trials[k].macro_f1);
      CHECK(a.trials[k].epoch_loss == b.trials[k].epoch_loss);
    }
    for (std::size_t k : {std::size_t{0}, std::size_t{5}, g.size() - 1}) {
      const TrainConfig cfg = g.enumerate(9, false)[k];
      const auto tr = SeparableProvider(1, 16)(cfg.max_seq_len);
      const auto va = SeparableProvider(2, 8)(cfg.max_seq_len);
      const TrialResult alone = run_trial(k, cfg, tr, va, GridModel(), words, 1, MacroOver::kAll);
      CHECK(alone.macro_f1 == a.trials[k].macro_f1);
      CHECK(alone.epoch_loss == a.trials[k].epoch_loss);
    }
  }

  TEST_CASE("repeats average over derived seeds") {
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.max_seq_len = 8;
    cfg.n_filters = 2;
    cfg.learning_rate = 0.01;
    const auto tr = SeparableProvider(1, 12)(8);
    const auto va = SeparableProvider(2, 6)(8);
    const auto words = testing::random_words<float>(20, 4, 1);
    const TrialResult r = run_trial(0, cfg, tr, va, GridModel(), words, 3, MacroOver::kAll);
    REQUIRE(r.repeat_f1.size() == 3);
    CHECK(r.macro_f1 == doctest::Approx((r.repeat_f1[0] + r.repeat_f1[1] + r.repeat_f1[2]) / 3));
  }

  TEST_CASE("empty grid is an error") {
    Grid g;
    g.n_filters.clear();
    CHECK_THROWS_AS(grid_search(SeparableProvider(1, 4), SeparableProvider(2, 4), g, 1, false,
                                GridModel(), testing::random_words<float>(20, 4, 1),
                                GridOptions{}),
                    ConfigError);
  }
}

TEST_CASE("final fit trains on the union and lowers the loss") {
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 8;
  cfg.max_seq_len = 10;
  cfg.n_filters = 4;
  const auto words = testing::random_words<float>(20, 6, 1);
  const auto a = final_fit({SeparableProvider(1, 24), SeparableProvider(2, 12)}, cfg,
                           ModelConfig{}, words);
  const auto b = final_fit({SeparableProvider(1, 24), SeparableProvider(2, 12)}, cfg,
                           ModelConfig{}, words);
  CHECK(Flatten(a.params) == Flatten(b.params));
  CHECK(a.log.epoch_loss.back() < a.log.initial_loss);
}
