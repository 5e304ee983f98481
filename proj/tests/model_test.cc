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

#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles/oracles.h"
#include "relpcnn/diff/adam.h"
#include "relpcnn/errors.h"
#include "relpcnn/model.h"
#include "testing/fixtures.h"

using namespace relpcnn;

namespace {

template <typename T>
std::vector<double> Flatten(ModelParams<T> &params, bool grads) {
  std::vector<double> out;
  for (auto &ref : params.named()) {
    if (grads) {
      if (!ref.tensor->has_grad()) {
        out.insert(out.end(), ref.tensor->size(), 0.0);
        continue;
      }
      out.insert(out.end(), ref.tensor->grad().begin(), ref.tensor->grad().end());
    } else {
      out.insert(out.end(), ref.tensor->data().begin(), ref.tensor->data().end());
    }
  }
  return out;
}

ModelConfig SmallConfig(int max_len = 12) {
  ModelConfig cfg;
  cfg.n_filters = 4;
  cfg.max_seq_len = max_len;
  return cfg;
}

}  // namespace

TEST_SUITE("forward") {
  TEST_CASE("logits have one entry per class and inference is deterministic") {
    const ModelConfig cfg = SmallConfig();
    auto params = init_params(cfg, testing::random_words<float>(20, 8, 1), 3);
    std::mt19937_64 rng(1);
    const auto inst = testing::random_instance(rng, 20, cfg.max_seq_len, cfg.position_window);
    diff::Rng r1(5), r2(99);
    const auto a = forward(inst, params, cfg, diff::Mode::kInfer, r1);
    const auto b = forward(inst, params, cfg, diff::Mode::kInfer, r2);
    CHECK(a.logits.shape() == diff::Shape{6});
    CHECK(a.logits == b.logits);
  }

  TEST_CASE("per-token input width with 300-dimensional words") {
    ModelConfig cfg = SmallConfig();
    auto params = init_params(cfg, testing::random_words<float>(10, 300, 1), 3);
    std::mt19937_64 rng(2);
    const auto inst = testing::random_instance(rng, 10, cfg.max_seq_len, cfg.position_window);
    diff::Rng drng(1);
    const auto cache = forward(inst, params, cfg, diff::Mode::kInfer, drng);
    CHECK(cache.input.dim(1) == 310);
    CHECK(cache.input.dim(0) == static_cast<std::size_t>(inst.real_length));
  }

  TEST_CASE("representation width for 64 filters") {
    ModelConfig cfg;
    CHECK(cfg.rep_dim() == 581);
    cfg.max_seq_len = 16;
    auto params = init_params(cfg, testing::random_words<float>(10, 6, 1), 3);
    std::mt19937_64 rng(3);
    const auto inst = testing::random_instance(rng, 10, cfg.max_seq_len, cfg.position_window);
    diff::Rng drng(1);
    const auto cache = forward(inst, params, cfg, diff::Mode::kInfer, drng);
    CHECK(cache.rep.shape() == diff::Shape{581});
    for (const auto &pooled : cache.pooled) CHECK(pooled.output.shape() == diff::Shape{192});
    CHECK(params.weights.shape() == diff::Shape{581, 6});
  }

  TEST_CASE("inconsistent parameters are rejected before any arithmetic") {
    const ModelConfig cfg = SmallConfig();
    auto params = init_params(cfg, testing::random_words<float>(10, 8, 1), 3);
    params.weights = diff::Tensor<float>({7, 6});
    std::mt19937_64 rng(4);
    const auto inst = testing::random_instance(rng, 10, cfg.max_seq_len, cfg.position_window);
    diff::Rng drng(1);
    CHECK_THROWS_AS(forward(inst, params, cfg, diff::Mode::kInfer, drng), ShapeError);
    auto short_inst = inst;
    short_inst.token_ids.resize(3);
    auto good = init_params(cfg, testing::random_words<float>(10, 8, 1), 3);
    CHECK_THROWS_AS(forward(short_inst, good, cfg, diff::Mode::kInfer, drng), ShapeError);
  }

  TEST_CASE("padding is invisible to logits and gradients") {
    const ModelConfig cfg = SmallConfig(15);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      auto params = init_params(cfg, testing::random_words<double>(30, 6, trial), trial);
      auto inst = testing::random_instance(rng, 30, cfg.max_seq_len, cfg.position_window);
      if (inst.real_length == cfg.max_seq_len) continue;
      auto noisy = inst;
      for (int i = inst.real_length; i < cfg.max_seq_len; ++i) {
        noisy.token_ids[i] = std::uniform_int_distribution<int>(0, 29)(rng);
        noisy.rel_pos1[i] = std::uniform_int_distribution<int>(-30, 30)(rng);
        noisy.rel_pos2[i] = std::uniform_int_distribution<int>(-30, 30)(rng);
      }
      diff::Rng r1(7), r2(7);
      CHECK(forward(inst, params, cfg, diff::Mode::kInfer, r1).logits ==
            forward(noisy, params, cfg, diff::Mode::kInfer, r2).logits);
      diff::Rng g1(8), g2(8);
      const std::vector<RelationInstance> a = {inst};
      const std::vector<RelationInstance> b = {noisy};
      const double la = loss_and_grads<double>(a, params, cfg, g1);
      const auto grads_a = Flatten(params, true);
      const double lb = loss_and_grads<double>(b, params, cfg, g2);
      CHECK(la == lb);
      CHECK(grads_a == Flatten(params, true));
    }
  }

  TEST_CASE("flipping the direction swaps the appended direction row") {
    const ModelConfig cfg = SmallConfig();
    auto params = init_params(cfg, testing::random_words<float>(20, 8, 1), 3);
    std::mt19937_64 rng(6);
    auto inst = testing::random_instance(rng, 20, cfg.max_seq_len, cfg.position_window);
    inst.direction = Direction::kForward;
    auto flipped = inst;
    flipped.direction = Direction::kReverse;
    diff::Rng drng(1);
    const auto a = forward(inst, params, cfg, diff::Mode::kInfer, drng);
    const auto b = forward(flipped, params, cfg, diff::Mode::kInfer, drng);
    const std::size_t tail = cfg.rep_dim() - cfg.dir_dim;
    for (std::size_t i = 0; i < tail; ++i) CHECK(a.rep[i] == b.rep[i]);
    for (int k = 0; k < cfg.dir_dim; ++k) {
      CHECK(a.rep[tail + k] == params.dir.matrix.at(0, k));
      CHECK(b.rep[tail + k] == params.dir.matrix.at(1, k));
    }
    CHECK_FALSE(a.logits == b.logits);
  }
}

TEST_SUITE("loss_and_grads") {
  TEST_CASE("a duplicated batch has the mean loss and gradient of one instance") {
    ModelConfig cfg = SmallConfig();
    cfg.keep_prob = 1.0;
    auto params = init_params(cfg, testing::random_words<double>(20, 5, 2), 4);
    std::mt19937_64 rng(7);
    const auto inst = testing::random_instance(rng, 20, cfg.max_seq_len, cfg.position_window);
    diff::Rng d1(1), d2(1);
    const std::vector<RelationInstance> one = {inst};
    const std::vector<RelationInstance> two = {inst, inst};
    const double l1 = loss_and_grads<double>(one, params, cfg, d1);
    const auto g1 = Flatten(params, true);
    const double l2 = loss_and_grads<double>(two, params, cfg, d2);
    CHECK(l2 == doctest::Approx(l1).epsilon(1e-14));
    CHECK(oracle::max_relative_error(Flatten(params, true), g1) < 1e-12);
  }

  TEST_CASE("full-model gradient agrees with finite differences") {
    // vocab 10, d_w 4, two filters per width, sequences of 7.
    for (const bool with_dropout : {false, true}) {
      for (const Nonlinearity nl : {Nonlinearity::kTanh, Nonlinearity::kNone}) {
        ModelConfig cfg = testing::tiny_config();
        cfg.nonlinearity = nl;
        cfg.keep_prob = with_dropout ? 0.5 : 1.0;
        auto params = init_params(cfg, testing::random_words<double>(10, 4, 11), 12);
        // Non-zero biases so every path carries signal.
        std::mt19937_64 rng(13);
        for (auto &ref : params.named()) {
          if (ref.name.find("bias") != std::string::npos) {
            for (double &v : ref.tensor->data()) v = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
          }
        }
        std::vector<RelationInstance> batch;
        for (int i = 0; i < 3; ++i) {
          batch.push_back(testing::random_instance(rng, 10, cfg.max_seq_len, cfg.position_window));
        }
        diff::Rng drng(21);
        loss_and_grads<double>(batch, params, cfg, drng);
        const auto analytic = Flatten(params, true);
        auto loss = [&] {
          diff::Rng same(21);
          return loss_and_grads<double>(batch, params, cfg, same);
        };
        std::vector<double> numeric;
        for (auto &ref : params.named()) {
          const auto part = oracle::numeric_gradient(ref.tensor->data(), loss);
          numeric.insert(numeric.end(), part.begin(), part.end());
        }
        // The PAD row is frozen: its analytic gradient is zero by design.
        for (std::size_t k = 0; k < 4; ++k) numeric[k] = 0.0;
        INFO("dropout " << with_dropout << " tanh " << (nl == Nonlinearity::kTanh));
        CHECK(oracle::max_relative_error(analytic, numeric) < 1e-3);
      }
    }
  }

  TEST_CASE("frozen word vectors receive no update") {
    ModelConfig cfg = SmallConfig();
    cfg.fine_tune_words = false;
    auto params = init_params(cfg, testing::random_words<float>(20, 5, 2), 4);
    for (const auto &ref : params.trainable()) CHECK(ref.name != "words");
    CHECK(params.named().size() == params.trainable().size() + 1);
  }

  TEST_CASE("unlabeled or empty batches are errors") {
    const ModelConfig cfg = SmallConfig();
    auto params = init_params(cfg, testing::random_words<float>(20, 5, 2), 4);
    std::mt19937_64 rng(9);
    auto inst = testing::random_instance(rng, 20, cfg.max_seq_len, cfg.position_window);
    inst.label.reset();
    diff::Rng drng(1);
    const std::vector<RelationInstance> batch = {inst};
    CHECK_THROWS_AS(loss_and_grads<float>(batch, params, cfg, drng), ConfigError);
    CHECK_THROWS_AS(loss_and_grads<float>({}, params, cfg, drng), ConfigError);
  }

  TEST_CASE("untrained models average close to log 6") {
    ModelConfig cfg;
    cfg.max_seq_len = 40;
    std::mt19937_64 rng(10);
    std::vector<RelationInstance> batch;
    for (int i = 0; i < 20; ++i) {
      batch.push_back(testing::random_instance(rng, 200, cfg.max_seq_len, cfg.position_window));
    }
    double total = 0;
    const int inits = 100;
    for (int seed = 0; seed < inits; ++seed) {
      auto params = init_params(cfg, testing::random_words<float>(200, 50, 1000 + seed), seed);
      total += mean_loss<float>(batch, params, cfg);
    }
    const double mean = total / inits;
    INFO("mean initial loss " << mean);
    CHECK(std::abs(mean - std::log(6.0)) <= 0.3);
  }
}

TEST_SUITE("predict") {
  TEST_CASE("probabilities are a distribution whose argmax is the label") {
    const ModelConfig cfg = SmallConfig();
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
      auto params = init_params(cfg, testing::random_words<float>(20, 5, trial), trial);
      const auto inst = testing::random_instance(rng, 20, cfg.max_seq_len, cfg.position_window);
      const Prediction p = predict(inst, params, cfg);
      double sum = 0;
      for (double v : p.probabilities) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
      const auto best = std::max_element(p.probabilities.begin(), p.probabilities.end());
      CHECK(relation_index(p.label) == best - p.probabilities.begin());
      // A constant added to every logit through the output bias changes nothing.
      auto shifted = params;
      for (float &b : shifted.bias.data()) b += 3.5f;
      CHECK(predict(inst, shifted, cfg).label == p.label);
    }
  }
}

TEST_CASE("twenty random instances are memorized in 400 full-batch epochs") {
  ModelConfig cfg;
  cfg.max_seq_len = 30;
  std::mt19937_64 rng(14);
  std::vector<RelationInstance> data;
  for (int i = 0; i < 20; ++i) {
    data.push_back(testing::random_instance(rng, 100, cfg.max_seq_len, cfg.position_window));
  }
  auto params = init_params(cfg, testing::random_words<float>(100, 50, 3), 15);
  params.enable_grads();
  diff::AdamState<float> adam;
  adam.learning_rate = 0.001;
  diff::Rng drng(16);
  for (int epoch = 0; epoch < 400; ++epoch) {
    loss_and_grads<float>(data, params, cfg, drng);
    diff::adam_step(params.trainable(), adam);
  }
  int correct = 0;
  for (const auto &inst : data) correct += predict(inst, params, cfg).label == inst.label;
  CHECK(correct == 20);
}

TEST_CASE("saved models load back identically") {
  SavedModel saved;
  saved.model = SmallConfig();
  saved.preprocess.max_seq_len = saved.model.max_seq_len;
  saved.vocab.add("alpha");
  saved.vocab.add("beta");
  saved.params = init_params(saved.model, testing::random_words<float>(4, 3, 1), 2);
  const auto path = std::filesystem::temp_directory_path() / "relpcnn_model_test.ckpt";
  save_model(path, saved);
  const SavedModel back = load_model(path);
  std::filesystem::remove(path);
  CHECK(back.model == saved.model);
  CHECK(back.vocab == saved.vocab);
  CHECK(back.preprocess.max_seq_len == saved.preprocess.max_seq_len);
  auto a = saved.params;
  auto b = back.params;
  CHECK(Flatten(a, false) == Flatten(b, false));
  CHECK(b.words.frozen_row == Vocabulary::kPad);
}

TEST_CASE("config validation reports every violation") {
  ModelConfig cfg;
  cfg.n_filters = 0;
  cfg.keep_prob = 1.5;
  cfg.filter_widths.clear();
  std::vector<std::string> errors;
  cfg.validate(&errors);
  CHECK(errors.size() == 3);
  CHECK(model_config_from_json(model_config_to_json(ModelConfig{})) == ModelConfig{});
}
