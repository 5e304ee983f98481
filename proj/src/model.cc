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

#include "relpcnn/model.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "relpcnn/diff/checkpoint.h"
#include "relpcnn/errors.h"

namespace relpcnn {

namespace {

using diff::Tensor;

template <typename T>
Tensor<T> GlorotUniform(diff::Shape shape, double fan_in, double fan_out,
                        std::uint64_t seed) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor<T> t(std::move(shape));
  for (T &v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

void Expect(bool ok, const std::string &what) {
  if (!ok) throw ShapeError(what);
}

template <typename T>
void CheckInstance(const RelationInstance &inst, const ModelParams<T> &params,
                   const ModelConfig &cfg) {
  const int len = inst.real_length;
  Expect(len > 0 && len <= static_cast<int>(inst.token_ids.size()) &&
             inst.rel_pos1.size() >= static_cast<std::size_t>(len) &&
             inst.rel_pos2.size() >= static_cast<std::size_t>(len),
         "instance arrays shorter than real_length " + std::to_string(len));
  Expect(inst.p1 != inst.p2 && inst.p1 >= 0 && inst.p2 >= 0 && inst.p1 < len &&
             inst.p2 < len,
         "instance entity positions (" + std::to_string(inst.p1) + ", " +
             std::to_string(inst.p2) + ") invalid for real_length " +
             std::to_string(len));
  const int rows = static_cast<int>(params.words.rows());
  for (int i = 0; i < len; ++i) {
    Expect(inst.token_ids[i] >= 0 && inst.token_ids[i] < rows,
           "token id " + std::to_string(inst.token_ids[i]) +
               " outside vocabulary of " + std::to_string(rows));
    Expect(std::abs(inst.rel_pos1[i]) <= cfg.position_window &&
               std::abs(inst.rel_pos2[i]) <= cfg.position_window,
           "relative position exceeds window " +
               std::to_string(cfg.position_window));
  }
}

nlohmann::json ConfigJson(const ModelConfig &cfg) {
  return {{"filter_widths", cfg.filter_widths},
          {"n_filters", cfg.n_filters},
          {"pos_dim", cfg.pos_dim},
          {"dir_dim", cfg.dir_dim},
          {"n_classes", cfg.n_classes},
          {"keep_prob", cfg.keep_prob},
          {"max_seq_len", cfg.max_seq_len},
          {"position_window", cfg.position_window},
          {"nonlinearity", cfg.nonlinearity == Nonlinearity::kTanh ? "tanh" : "none"},
          {"fine_tune_words", cfg.fine_tune_words}};
}

ModelConfig ConfigFromJson(const nlohmann::json &j) {
  ModelConfig cfg;
  cfg.filter_widths = j.at("filter_widths").get<std::vector<int>>();
  cfg.n_filters = j.at("n_filters").get<int>();
  cfg.pos_dim = j.at("pos_dim").get<int>();
  cfg.dir_dim = j.at("dir_dim").get<int>();
  cfg.n_classes = j.at("n_classes").get<int>();
  cfg.keep_prob = j.at("keep_prob").get<double>();
  cfg.max_seq_len = j.at("max_seq_len").get<int>();
  cfg.position_window = j.at("position_window").get<int>();
  cfg.nonlinearity = j.at("nonlinearity").get<std::string>() == "tanh"
                         ? Nonlinearity::kTanh
                         : Nonlinearity::kNone;
  cfg.fine_tune_words = j.at("fine_tune_words").get<bool>();
  return cfg;
}

}  // namespace

void ModelConfig::validate(std::vector<std::string> *errors) const {
  if (filter_widths.empty()) errors->push_back("filter_widths must not be empty");
  for (int w : filter_widths) {
    if (w <= 0) errors->push_back("filter widths must be positive");
  }
  if (n_filters <= 0) errors->push_back("n_filters must be positive");
  if (pos_dim <= 0) errors->push_back("pos_dim must be positive");
  if (dir_dim <= 0) errors->push_back("dir_dim must be positive");
  if (n_classes != kNumRelations) {
    errors->push_back("n_classes must be " + std::to_string(kNumRelations));
  }
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    errors->push_back("keep_prob must be in (0, 1]");
  }
  if (max_seq_len <= 0) errors->push_back("max_seq_len must be positive");
  if (position_window <= 0) errors->push_back("position_window must be positive");
}

std::string model_config_to_json(const ModelConfig &cfg) {
  return ConfigJson(cfg).dump();
}

ModelConfig model_config_from_json(const std::string &text) {
  try {
    return ConfigFromJson(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception &e) {
    throw LoadError(std::string("bad model config: ") + e.what());
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

template <typename T>
std::vector<diff::ParamRef<T>> ModelParams<T>::named() {
  std::vector<diff::ParamRef<T>> out = {{"words", &words.matrix},
                                        {"pos1", &pos1.matrix},
                                        {"pos2", &pos2.matrix},
                                        {"dir", &dir.matrix}};
  for (std::size_t i = 0; i < filters.size(); ++i) {
    out.push_back({"conv" + std::to_string(i) + ".filters", &filters[i]});
    out.push_back({"conv" + std::to_string(i) + ".bias", &biases[i]});
  }
  out.push_back({"out.weights", &weights});
  out.push_back({"out.bias", &bias});
  return out;
}

template <typename T>
std::vector<diff::ParamRef<T>> ModelParams<T>::trainable() {
  auto all = named();
  if (!words.trainable) all.erase(all.begin());
  return all;
}

template <typename T>
void ModelParams<T>::enable_grads() {
  for (auto &p : trainable()) p.tensor->ensure_grad();
}

template <typename T>
void ModelParams<T>::zero_grads() {
  for (auto &p : named()) p.tensor->zero_grad();
}

template <typename T>
template <typename U>
ModelParams<U> ModelParams<T>::cast() const {
  ModelParams<U> out;
  out.words = words.template cast<U>();
  out.pos1 = pos1.template cast<U>();
  out.pos2 = pos2.template cast<U>();
  out.dir = dir.template cast<U>();
  for (const auto &f : filters) out.filters.push_back(f.template cast<U>());
  for (const auto &b : biases) out.biases.push_back(b.template cast<U>());
  out.weights = weights.template cast<U>();
  out.bias = bias.template cast<U>();
  return out;
}

template <typename T>
ModelParams<T> init_params(const ModelConfig &cfg, EmbeddingTable<T> words,
                           std::uint64_t seed) {
  std::vector<std::string> errors;
  cfg.validate(&errors);
  if (!errors.empty()) throw ConfigError(errors.front());

  ModelParams<T> p;
  p.words = std::move(words);
  p.words.trainable = cfg.fine_tune_words;
  p.words.frozen_row = Vocabulary::kPad;
  p.pos1 = position_table<T>(cfg.position_window, cfg.pos_dim, derive_seed(seed, 1));
  p.pos2 = position_table<T>(cfg.position_window, cfg.pos_dim, derive_seed(seed, 2));
  p.dir = direction_table<T>(cfg.dir_dim, derive_seed(seed, 3));
  const std::size_t d_in = p.words.dim() + 2 * static_cast<std::size_t>(cfg.pos_dim);
  const std::size_t n_f = cfg.n_filters;
  for (std::size_t i = 0; i < cfg.filter_widths.size(); ++i) {
    const std::size_t w = cfg.filter_widths[i];
    p.filters.push_back(GlorotUniform<T>({w, d_in, n_f}, double(w * d_in),
                                         double(w * n_f), derive_seed(seed, 10 + i)));
    p.biases.push_back(Tensor<T>({n_f}));
  }
  const std::size_t k = cfg.n_classes;
  p.weights = GlorotUniform<T>({cfg.rep_dim(), k}, double(cfg.rep_dim()), double(k),
                               derive_seed(seed, 4));
  p.bias = Tensor<T>({k});
  return p;
}

template <typename T>
void check_params(const ModelParams<T> &p, const ModelConfig &cfg) {
  const std::size_t d_in = p.words.dim() + 2 * static_cast<std::size_t>(cfg.pos_dim);
  const std::size_t pos_rows = 2 * static_cast<std::size_t>(cfg.position_window) + 1;
  Expect(p.pos1.rows() == pos_rows && p.pos2.rows() == pos_rows &&
             p.pos1.dim() == std::size_t(cfg.pos_dim) &&
             p.pos2.dim() == std::size_t(cfg.pos_dim),
         "position tables " + p.pos1.matrix.shape_string() + " do not match window " +
             std::to_string(cfg.position_window) + " and pos_dim " +
             std::to_string(cfg.pos_dim));
  Expect(p.dir.rows() == 2 && p.dir.dim() == std::size_t(cfg.dir_dim),
         "direction table " + p.dir.matrix.shape_string() + " does not match dir_dim " +
             std::to_string(cfg.dir_dim));
  Expect(p.filters.size() == cfg.filter_widths.size() &&
             p.biases.size() == cfg.filter_widths.size(),
         "filter bank count does not match filter_widths");
  for (std::size_t i = 0; i < p.filters.size(); ++i) {
    const diff::Shape want = {std::size_t(cfg.filter_widths[i]), d_in,
                              std::size_t(cfg.n_filters)};
    Expect(p.filters[i].shape() == want,
           "filter bank " + std::to_string(i) + " has shape " +
               p.filters[i].shape_string() + ", expected " + diff::shape_string(want));
    Expect(p.biases[i].shape() == diff::Shape{std::size_t(cfg.n_filters)},
           "filter bias " + std::to_string(i) + " has shape " +
               p.biases[i].shape_string());
  }
  const diff::Shape want_w = {cfg.rep_dim(), std::size_t(cfg.n_classes)};
  Expect(p.weights.shape() == want_w,
         "classifier weights " + p.weights.shape_string() + ", expected " +
             diff::shape_string(want_w));
  Expect(p.bias.shape() == diff::Shape{std::size_t(cfg.n_classes)},
         "classifier bias " + p.bias.shape_string());
}

template <typename T>
ForwardCache<T> forward(const RelationInstance &inst, const ModelParams<T> &params,
                        const ModelConfig &cfg, diff::Mode mode, diff::Rng &rng) {
  check_params(params, cfg);
  CheckInstance(inst, params, cfg);
  const std::size_t len = inst.real_length;
  const int window = cfg.position_window;

  ForwardCache<T> c;
  std::vector<int> pos1_ids(len), pos2_ids(len);
  for (std::size_t i = 0; i < len; ++i) {
    pos1_ids[i] = position_row(inst.rel_pos1[i], window);
    pos2_ids[i] = position_row(inst.rel_pos2[i], window);
  }
  c.word_rows = lookup(params.words, std::span<const int>(inst.token_ids.data(), len));
  c.pos1_rows = lookup(params.pos1, std::span<const int>(pos1_ids));
  c.pos2_rows = lookup(params.pos2, std::span<const int>(pos2_ids));
  c.input = diff::concat<T>({&c.word_rows, &c.pos1_rows, &c.pos2_rows}, 1);

  std::vector<const Tensor<T> *> parts;
  for (std::size_t i = 0; i < params.filters.size(); ++i) {
    c.conv.push_back(diff::conv1d_same(c.input, params.filters[i], params.biases[i]));
  }
  for (std::size_t i = 0; i < c.conv.size(); ++i) {
    c.pooled.push_back(diff::piecewise_max_pool(c.conv[i], inst.p1, inst.p2,
                                                inst.real_length));
  }
  for (const auto &p : c.pooled) parts.push_back(&p.output);
  const int dir_index = static_cast<int>(inst.direction);
  const auto dir_src = params.dir.matrix.row(dir_index);
  c.dir_row = Tensor<T>({params.dir.dim()},
                        std::vector<T>(dir_src.begin(), dir_src.end()));
  parts.push_back(&c.dir_row);
  c.rep = diff::concat<T>(parts, 0);

  const Tensor<T> *hidden = &c.rep;
  if (cfg.nonlinearity == Nonlinearity::kTanh) {
    c.activated = diff::tanh_activation(c.rep);
    hidden = &c.activated;
  }
  c.dropped = diff::dropout(*hidden, cfg.keep_prob, mode, rng);
  c.logits = diff::affine(c.dropped.output, params.weights, params.bias);
  return c;
}

template <typename T>
void backward(ForwardCache<T> &c, std::span<const T> grad_logits,
              const RelationInstance &inst, ModelParams<T> &params,
              const ModelConfig &cfg) {
  c.logits.ensure_grad();
  std::copy(grad_logits.begin(), grad_logits.end(), c.logits.grad().begin());

  c.dropped.output.ensure_grad();
  diff::affine_backward(c.logits, c.dropped.output, params.weights, params.bias);

  Tensor<T> &hidden = cfg.nonlinearity == Nonlinearity::kTanh ? c.activated : c.rep;
  hidden.ensure_grad();
  diff::dropout_backward(c.dropped, hidden);
  if (cfg.nonlinearity == Nonlinearity::kTanh) {
    c.rep.ensure_grad();
    diff::tanh_activation_backward(c.activated, c.rep);
  }

  std::vector<Tensor<T> *> parts;
  for (auto &p : c.pooled) {
    p.output.ensure_grad();
    parts.push_back(&p.output);
  }
  c.dir_row.ensure_grad();
  parts.push_back(&c.dir_row);
  diff::concat_backward(c.rep, parts, 0);

  if (params.dir.matrix.has_grad()) {
    const int dir_index = static_cast<int>(inst.direction);
    auto g = params.dir.matrix.grad().subspan(dir_index * params.dir.dim(),
                                              params.dir.dim());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += c.dir_row.grad()[k];
  }

  c.input.ensure_grad();
  for (std::size_t i = 0; i < c.conv.size(); ++i) {
    c.conv[i].ensure_grad();
    diff::piecewise_max_pool_backward(c.pooled[i], c.conv[i]);
    diff::conv1d_same_backward(c.conv[i], c.input, params.filters[i],
                               params.biases[i]);
  }

  const std::size_t len = inst.real_length;
  if (params.words.matrix.has_grad()) c.word_rows.ensure_grad();
  c.pos1_rows.ensure_grad();
  c.pos2_rows.ensure_grad();
  diff::concat_backward<T>(c.input, {&c.word_rows, &c.pos1_rows, &c.pos2_rows}, 1);

  std::vector<int> pos1_ids(len), pos2_ids(len);
  for (std::size_t i = 0; i < len; ++i) {
    pos1_ids[i] = position_row(inst.rel_pos1[i], cfg.position_window);
    pos2_ids[i] = position_row(inst.rel_pos2[i], cfg.position_window);
  }
  lookup_backward(c.word_rows, params.words,
                  std::span<const int>(inst.token_ids.data(), len));
  lookup_backward(c.pos1_rows, params.pos1, std::span<const int>(pos1_ids));
  lookup_backward(c.pos2_rows, params.pos2, std::span<const int>(pos2_ids));
}

template <typename T>
double loss_and_grads(std::span<const RelationInstance> batch,
                      ModelParams<T> &params, const ModelConfig &cfg,
                      diff::Rng &rng) {
  if (batch.empty()) throw ConfigError("loss_and_grads: empty batch");
  for (const RelationInstance &inst : batch) {
    if (!inst.label) {
      throw ConfigError("loss_and_grads: instance " + inst.arg1_id + "," +
                        inst.arg2_id + " has no label");
    }
  }
  params.enable_grads();
  params.zero_grads();
  const T scale = T(1) / static_cast<T>(batch.size());
  double total = 0.0;
  for (const RelationInstance &inst : batch) {
    ForwardCache<T> cache = forward(inst, params, cfg, diff::Mode::kTrain, rng);
    auto ce = diff::softmax_cross_entropy(cache.logits, relation_index(*inst.label));
    if (!std::isfinite(ce.loss)) {
      throw NumericError("non-finite loss on instance " + inst.arg1_id + "," +
                         inst.arg2_id);
    }
    total += ce.loss;
    for (T &g : ce.grad_logits.data()) g *= scale;
    backward(cache, std::span<const T>(ce.grad_logits.data()), inst, params, cfg);
  }
  return total / static_cast<double>(batch.size());
}

template <typename T>
double mean_loss(std::span<const RelationInstance> batch,
                 const ModelParams<T> &params, const ModelConfig &cfg) {
  if (batch.empty()) return 0.0;
  diff::Rng rng(0);
  double total = 0.0;
  for (const RelationInstance &inst : batch) {
    if (!inst.label) throw ConfigError("mean_loss: unlabeled instance");
    auto cache = forward(inst, params, cfg, diff::Mode::kInfer, rng);
    total += diff::softmax_cross_entropy(cache.logits, relation_index(*inst.label)).loss;
  }
  return total / static_cast<double>(batch.size());
}

template <typename T>
Prediction predict(const RelationInstance &inst, const ModelParams<T> &params,
                   const ModelConfig &cfg) {
  diff::Rng rng(0);
  const auto cache = forward(inst, params, cfg, diff::Mode::kInfer, rng);
  const auto probs = diff::softmax(cache.logits);
  Prediction out;
  out.probabilities.assign(probs.data().begin(), probs.data().end());
  const auto logits = cache.logits.data();
  out.label = relation_from_index(static_cast<int>(
      std::max_element(logits.begin(), logits.end()) - logits.begin()));
  return out;
}

void save_model(const std::filesystem::path &path, const SavedModel &model) {
  nlohmann::json meta = {
      {"format", "relpcnn-model"},
      {"model", ConfigJson(model.model)},
      {"preprocess",
       {{"max_seq_len", model.preprocess.max_seq_len},
        {"position_window", model.preprocess.position_window},
        {"lowercase", model.preprocess.lowercase},
        {"number_token", model.preprocess.number_token}}},
      {"vocab", model.vocab.tokens()},
  };
  diff::Checkpoint<float> ckpt;
  ckpt.metadata = meta.dump();
  auto params = model.params;
  for (const auto &p : params.named()) ckpt.tensors.push_back({p.name, *p.tensor});
  for (auto &t : ckpt.tensors) t.tensor.drop_grad();
  diff::save_checkpoint(path, ckpt);
}

SavedModel load_model(const std::filesystem::path &path) {
  const auto ckpt = diff::load_checkpoint<float>(path);
  SavedModel out;
  try {
    const auto meta = nlohmann::json::parse(ckpt.metadata);
    out.model = ConfigFromJson(meta.at("model"));
    const auto &pre = meta.at("preprocess");
    out.preprocess.max_seq_len = pre.at("max_seq_len").get<int>();
    out.preprocess.position_window = pre.at("position_window").get<int>();
    out.preprocess.lowercase = pre.at("lowercase").get<bool>();
    out.preprocess.number_token = pre.at("number_token").get<std::string>();
    out.vocab = Vocabulary::from_tokens(
        meta.at("vocab").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception &e) {
    throw LoadError(path.string() + ": bad checkpoint metadata: " + e.what());
  }
  auto &p = out.params;
  p.filters.resize(out.model.filter_widths.size());
  p.biases.resize(out.model.filter_widths.size());
  for (auto &ref : p.named()) *ref.tensor = ckpt.get(ref.name);
  p.words.trainable = out.model.fine_tune_words;
  p.words.frozen_row = Vocabulary::kPad;
  check_params(p, out.model);
  if (p.words.rows() != out.vocab.size()) {
    throw LoadError(path.string() + ": word table has " +
                    std::to_string(p.words.rows()) + " rows for a vocabulary of " +
                    std::to_string(out.vocab.size()));
  }
  return out;
}

#define RELPCNN_INSTANTIATE_MODEL(T)                                           \
  template struct ModelParams<T>;                                              \
  template ModelParams<T> init_params(const ModelConfig &, EmbeddingTable<T>,  \
                                      std::uint64_t);                          \
  template void check_params(const ModelParams<T> &, const ModelConfig &);     \
  template ForwardCache<T> forward(const RelationInstance &,                   \
                                   const ModelParams<T> &,                     \
                                   const ModelConfig &, diff::Mode,            \
                                   diff::Rng &);                               \
  template void backward(ForwardCache<T> &, std::span<const T>,                \
                         const RelationInstance &, ModelParams<T> &,           \
                         const ModelConfig &);                                 \
  template double loss_and_grads(std::span<const RelationInstance>,            \
                                 ModelParams<T> &, const ModelConfig &,        \
                                 diff::Rng &);                                 \
  template double mean_loss(std::span<const RelationInstance>,                 \
                            const ModelParams<T> &, const ModelConfig &);      \
  template Prediction predict(const RelationInstance &,                        \
                              const ModelParams<T> &, const ModelConfig &);

RELPCNN_INSTANTIATE_MODEL(float)
RELPCNN_INSTANTIATE_MODEL(double)

template ModelParams<double> ModelParams<float>::cast<double>() const;
template ModelParams<float> ModelParams<double>::cast<float>() const;
template ModelParams<float> ModelParams<float>::cast<float>() const;
template ModelParams<double> ModelParams<double>::cast<double>() const;

#undef RELPCNN_INSTANTIATE_MODEL

}  // namespace relpcnn
