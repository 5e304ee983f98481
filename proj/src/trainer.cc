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

#include "relpcnn/trainer.h"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "json.hpp"
#include "relpcnn/errors.h"

namespace relpcnn {

void TrainConfig::validate(std::vector<std::string> *errors) const {
  if (epochs < 0) errors->push_back("epochs must be non-negative");
  if (batch_size <= 0) errors->push_back("batch_size must be positive");
  if (!(learning_rate >= 0.0)) errors->push_back("learning_rate must be non-negative");
  if (max_seq_len <= 0) errors->push_back("max_seq_len must be positive");
  if (n_filters <= 0) errors->push_back("n_filters must be positive");
}

std::string TrainConfig::to_json() const {
  return nlohmann::json{{"epochs", epochs},
                        {"batch_size", batch_size},
                        {"learning_rate", learning_rate},
                        {"max_seq_len", max_seq_len},
                        {"n_filters", n_filters},
                        {"seed", seed},
                        {"augment", augment}}
      .dump();
}

ModelConfig with_train_config(const ModelConfig &base, const TrainConfig &train) {
  ModelConfig cfg = base;
  cfg.n_filters = train.n_filters;
  cfg.max_seq_len = train.max_seq_len;
  return cfg;
}

namespace {

std::string Namespaced(SourceTag tag, const std::string &id) {
  return std::string(source_tag_name(tag)) + ":" + id;
}

void AppendNamespaced(const Corpus &src, Corpus *dst,
                      std::unordered_set<std::string> *doc_ids) {
  for (const Document &doc : src.documents) {
    Document copy = doc;
    copy.doc_id = Namespaced(src.source_tag, doc.doc_id);
    for (EntitySpan &span : copy.entities) {
      span.entity_id = Namespaced(src.source_tag, span.entity_id);
    }
    if (!doc_ids->insert(copy.doc_id).second) {
      throw ResolveError("document id '" + copy.doc_id + "' collides after merging");
    }
    dst->documents.push_back(std::move(copy));
  }
  for (const RelationRecord &rel : src.relations) {
    RelationRecord copy = rel;
    copy.arg1_id = Namespaced(src.source_tag, rel.arg1_id);
    copy.arg2_id = Namespaced(src.source_tag, rel.arg2_id);
    dst->relations.push_back(std::move(copy));
  }
}

}  // namespace

Corpus augment(const Corpus &primary, const Corpus &other) {
  Corpus merged;
  merged.source_tag = SourceTag::kMerged;
  std::unordered_set<std::string> doc_ids;
  AppendNamespaced(primary, &merged, &doc_ids);
  AppendNamespaced(other, &merged, &doc_ids);
  return merged;
}

std::string strip_namespace(const std::string &id) {
  const auto colon = id.find(':');
  if (colon == std::string::npos) return id;
  if (!parse_source_tag(std::string_view(id).substr(0, colon))) return id;
  return id.substr(colon + 1);
}

template <typename T>
TrainResult<T> train(std::span<const RelationInstance> data, const TrainConfig &cfg,
                     const ModelConfig &model_cfg, const EmbeddingTable<T> &words) {
  std::vector<std::string> errors;
  cfg.validate(&errors);
  if (!errors.empty()) throw ConfigError(errors.front());
  if (data.empty()) throw ConfigError("train: empty training set");

  const ModelConfig mcfg = with_train_config(model_cfg, cfg);
  TrainResult<T> result{init_params(mcfg, words, derive_seed(cfg.seed, 0)), {}};
  result.log.initial_loss = mean_loss(data, result.params, mcfg);

  diff::Rng shuffle_rng(derive_seed(cfg.seed, 1));
  diff::Rng dropout_rng(derive_seed(cfg.seed, 2));
  diff::AdamState<T> adam;
  adam.learning_rate = cfg.learning_rate;

  std::vector<std::size_t> order(data.size());
  std::vector<RelationInstance> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
      const double loss =
          loss_and_grads(std::span<const RelationInstance>(batch), result.params,
                         mcfg, dropout_rng);
      epoch_total += loss * static_cast<double>(end - start);
      diff::adam_step(result.params.trainable(), adam);
    }
    result.log.epoch_loss.push_back(epoch_total / static_cast<double>(data.size()));
  }
  for (auto &p : result.params.named()) p.tensor->drop_grad();
  return result;
}

template TrainResult<float> train(std::span<const RelationInstance>,
                                  const TrainConfig &, const ModelConfig &,
                                  const EmbeddingTable<float> &);
template TrainResult<double> train(std::span<const RelationInstance>,
                                   const TrainConfig &, const ModelConfig &,
                                   const EmbeddingTable<double> &);

std::vector<TrainConfig> Grid::enumerate(std::uint64_t seed, bool augment) const {
  std::vector<TrainConfig> out;
  for (int e : epochs) {
    for (int len : max_seq_lens) {
      for (int b : batch_sizes) {
        for (int f : n_filters) {
          for (double lr : learning_rates) {
            TrainConfig cfg;
            cfg.epochs = e;
            cfg.max_seq_len = len;
            cfg.batch_size = b;
            cfg.n_filters = f;
            cfg.learning_rate = lr;
            cfg.seed = seed ^ static_cast<std::uint64_t>(out.size());
            cfg.augment = augment;
            out.push_back(cfg);
          }
        }
      }
    }
  }
  return out;
}

std::size_t select_best(const std::vector<TrialResult> &trials) {
  if (trials.empty()) throw ConfigError("select_best: no trials");
  std::size_t best = 0;
  for (std::size_t i = 1; i < trials.size(); ++i) {
    const TrialResult &a = trials[i];
    const TrialResult &b = trials[best];
    const bool better =
        a.macro_f1 > b.macro_f1 ||
        (a.macro_f1 == b.macro_f1 &&
         (a.config.epochs < b.config.epochs ||
          (a.config.epochs == b.config.epochs &&
           (a.config.n_filters < b.config.n_filters ||
            (a.config.n_filters == b.config.n_filters && a.index < b.index)))));
    if (better) best = i;
  }
  return best;
}

double validation_macro_f1(std::span<const RelationInstance> instances,
                           const ModelParams<float> &params, const ModelConfig &cfg,
                           MacroOver macro_over) {
  std::vector<int> gold, pred;
  for (const RelationInstance &inst : instances) {
    if (!inst.label) throw ConfigError("validation instance without label");
    gold.push_back(relation_index(*inst.label));
    pred.push_back(relation_index(predict(inst, params, cfg).label));
  }
  return score(std::span<const int>(gold), std::span<const int>(pred), macro_over)
      .macro_f1;
}

TrialResult run_trial(std::size_t index, const TrainConfig &cfg,
                      std::span<const RelationInstance> train_set,
                      std::span<const RelationInstance> validation,
                      const ModelConfig &model_cfg, const EmbeddingTable<float> &words,
                      int repeats, MacroOver macro_over) {
  TrialResult trial;
  trial.index = index;
  trial.config = cfg;
  const ModelConfig mcfg = with_train_config(model_cfg, cfg);
  for (int r = 0; r < std::max(1, repeats); ++r) {
    TrainConfig run = cfg;
    if (r > 0) run.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const auto result = train(train_set, run, model_cfg, words);
    trial.repeat_f1.push_back(
        validation_macro_f1(validation, result.params, mcfg, macro_over));
    if (r == 0) trial.epoch_loss = result.log.epoch_loss;
  }
  trial.macro_f1 =
      std::accumulate(trial.repeat_f1.begin(), trial.repeat_f1.end(), 0.0) /
      static_cast<double>(trial.repeat_f1.size());
  return trial;
}

GridResult grid_search(const InstanceProvider &train_set,
                       const InstanceProvider &validation, const Grid &grid,
                       std::uint64_t seed, bool augment, const ModelConfig &model_cfg,
                       const EmbeddingTable<float> &words, const GridOptions &options) {
  const std::vector<TrainConfig> configs = grid.enumerate(seed, augment);
  if (configs.empty()) throw ConfigError("grid_search: empty grid");

  // Instances depend only on max_seq_len; build each variant once.
  std::vector<int> lengths = grid.max_seq_lens;
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());
  std::vector<std::vector<RelationInstance>> train_by_len, valid_by_len;
  for (int len : lengths) {
    train_by_len.push_back(train_set(len));
    valid_by_len.push_back(validation(len));
  }
  auto slot = [&](int len) {
    return std::lower_bound(lengths.begin(), lengths.end(), len) - lengths.begin();
  };

  GridResult result;
  result.trials.resize(configs.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= configs.size()) return;
      try {
        const auto s = slot(configs[k].max_seq_len);
        TrialResult trial = run_trial(k, configs[k], train_by_len[s], valid_by_len[s],
                                      model_cfg, words, options.repeats,
                                      options.macro_over);
        std::lock_guard<std::mutex> lock(mu);
        if (options.on_trial) options.on_trial(trial);
        result.trials[k] = std::move(trial);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        next = configs.size();
        return;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(options.parallelism,
                                                static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  result.best = select_best(result.trials);
  return result;
}

TrainResult<float> final_fit(const std::vector<InstanceProvider> &parts,
                             const TrainConfig &cfg, const ModelConfig &model_cfg,
                             const EmbeddingTable<float> &words) {
  std::vector<RelationInstance> all;
  for (const InstanceProvider &part : parts) {
    auto instances = part(cfg.max_seq_len);
    all.insert(all.end(), std::make_move_iterator(instances.begin()),
               std::make_move_iterator(instances.end()));
  }
  return train(std::span<const RelationInstance>(all), cfg, model_cfg, words);
}

}  // namespace relpcnn
