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

#include "relpcnn/cli.h"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "relpcnn/corpus.h"
#include "relpcnn/embeddings.h"
#include "relpcnn/errors.h"
#include "relpcnn/eval.h"
#include "relpcnn/model.h"
#include "relpcnn/preprocess.h"
#include "relpcnn/trainer.h"

namespace relpcnn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Label written for relations whose instance could not be built (e.g. the
// entity heads are too far apart). USAGE is the largest class in both
// subtasks.
constexpr Relation kFallbackLabel = Relation::kUsage;

struct CorpusFiles {
  std::string text;
  std::string relations;

  bool given() const { return !text.empty() || !relations.empty(); }
};

struct Options {
  CorpusFiles train, augment, valid, augment_valid, test;
  bool augment_flag = false;
  std::string task = "1.1";
  std::string embeddings;
  std::optional<std::size_t> vocab_limit;
  int word_dim = 50;
  bool freeze_words = false;
  std::string out_dir = ".";
  std::string model_path;
  std::string predictions;
  std::string gold;
  std::string report;
  std::string dump_instances;
  std::string dump_corpus;
  std::string nonlinearity = "tanh";
  std::string macro_over = "all";
  int parallel = 1;
  int repeats = 1;
  bool final_fit = false;
  TrainConfig train_cfg;
  ModelConfig model_cfg;
  PreprocessConfig pre_cfg;
  Grid grid;
};

void AddOptions(CLI::App &app, Options *o) {
  auto corpus = [&](const std::string &prefix, CorpusFiles *files, const std::string &what) {
    app.add_option("--" + prefix + "-text", files->text, what + " documents (entity markup)");
    app.add_option("--" + prefix + "-relations", files->relations, what + " relations");
  };
  corpus("train", &o->train, "Training");
  corpus("augment", &o->augment, "Augmentation partner training");
  corpus("augment-valid", &o->augment_valid, "Augmentation partner validation");
  corpus("valid", &o->valid, "Validation");
  corpus("test", &o->test, "Test");
  app.add_flag("--augment", o->augment_flag, "Mix in the augmentation partner corpus");
  app.add_option("--task", o->task, "Primary subtask: 1.1 or 1.2");
  app.add_option("--embeddings", o->embeddings, "Pretrained word vectors (text format)");
  app.add_option("--vocab-limit", o->vocab_limit, "Keep the first N vectors of the file");
  app.add_option("--word-dim", o->word_dim, "Word dimension when no vectors are given");
  app.add_flag("--freeze-words", o->freeze_words, "Do not fine-tune word vectors");
  app.add_option("--seed", o->train_cfg.seed, "Seed for all randomness");
  app.add_option("--out-dir", o->out_dir, "Directory for artifacts");
  app.add_option("--model", o->model_path, "Model checkpoint to read");
  app.add_option("--predictions", o->predictions, "Prediction file");
  app.add_option("--gold", o->gold, "Gold relations file");
  app.add_option("--report", o->report, "Score report output (JSON)");
  app.add_option("--dump-instances", o->dump_instances, "Write instances as JSON lines");
  app.add_option("--dump-corpus", o->dump_corpus, "Write the parsed corpus as JSON lines");
  app.add_option("--epochs", o->train_cfg.epochs, "Training epochs");
  app.add_option("--batch-size", o->train_cfg.batch_size, "Mini-batch size");
  app.add_option("--learning-rate", o->train_cfg.learning_rate, "Adam learning rate");
  app.add_option("--max-seq-len", o->train_cfg.max_seq_len, "Tokens kept per instance");
  app.add_option("--n-filters", o->train_cfg.n_filters, "Filters per width");
  app.add_option("--filter-widths", o->model_cfg.filter_widths, "Convolution widths, comma separated")->delimiter(',');
  app.add_option("--pos-dim", o->model_cfg.pos_dim, "Position embedding size");
  app.add_option("--dir-dim", o->model_cfg.dir_dim, "Direction embedding size");
  app.add_option("--keep-prob", o->model_cfg.keep_prob, "Dropout keep probability");
  app.add_option("--position-window", o->pre_cfg.position_window, "Relative distances are clipped to this");
  app.add_option("--nonlinearity", o->nonlinearity, "tanh or none");
  app.add_option("--lowercase", o->pre_cfg.lowercase, "Lowercase before lookup (true or false)");
  app.add_option("--number-token", o->pre_cfg.number_token, "Replacement for numeric tokens");
  app.add_option("--macro-over", o->macro_over, "all or present");
  app.add_option("--parallel", o->parallel, "Concurrent grid trials")
      ->envname("RELPCNN_PARALLEL");
  app.add_option("--repeats", o->repeats, "Seeded repeats per grid trial");
  app.add_flag("--final-fit", o->final_fit, "Retrain the best grid config on all data");
  app.add_option("--grid-epochs", o->grid.epochs, "Comma-separated values")->delimiter(',');
  app.add_option("--grid-max-seq-len", o->grid.max_seq_lens, "Comma-separated values")->delimiter(',');
  app.add_option("--grid-batch-size", o->grid.batch_sizes, "Comma-separated values")->delimiter(',');
  app.add_option("--grid-n-filters", o->grid.n_filters, "Comma-separated values")->delimiter(',');
  app.add_option("--grid-learning-rate", o->grid.learning_rates, "Comma-separated values")->delimiter(',');
}

// Fills the derived configuration fields and returns every violation.
std::vector<std::string> Finalize(const std::string &command, Options *o) {
  std::vector<std::string> errors;
  auto need = [&](const std::string &value, const std::string &flag) {
    if (value.empty()) errors.push_back(command + " requires " + flag);
  };
  auto pair = [&](const CorpusFiles &files, const std::string &prefix, bool required) {
    if (required || files.given()) {
      need(files.text, "--" + prefix + "-text");
      need(files.relations, "--" + prefix + "-relations");
    }
  };

  if (o->task != "1.1" && o->task != "1.2") {
    errors.push_back("--task must be 1.1 or 1.2, got '" + o->task + "'");
  }
  if (o->nonlinearity == "tanh") {
    o->model_cfg.nonlinearity = Nonlinearity::kTanh;
  } else if (o->nonlinearity == "none") {
    o->model_cfg.nonlinearity = Nonlinearity::kNone;
  } else {
    errors.push_back("--nonlinearity must be tanh or none, got '" + o->nonlinearity + "'");
  }
  if (!parse_macro_over(o->macro_over)) {
    errors.push_back("--macro-over must be all or present, got '" + o->macro_over + "'");
  }
  if (o->parallel < 1) errors.push_back("--parallel must be at least 1");
  if (o->repeats < 1) errors.push_back("--repeats must be at least 1");
  if (o->word_dim < 1) errors.push_back("--word-dim must be positive");
  if (o->vocab_limit && *o->vocab_limit == 0) errors.push_back("--vocab-limit must be positive");

  o->model_cfg.fine_tune_words = !o->freeze_words;
  o->train_cfg.augment = o->augment_flag || o->augment.given();
  o->model_cfg = with_train_config(o->model_cfg, o->train_cfg);
  o->pre_cfg.max_seq_len = o->train_cfg.max_seq_len;
  o->train_cfg.validate(&errors);
  o->model_cfg.validate(&errors);
  o->pre_cfg.validate(&errors);

  if (command == "inspect") {
    pair(o->train, "train", true);
  } else if (command == "train" || command == "grid") {
    pair(o->train, "train", true);
    pair(o->augment, "augment", o->augment_flag);
    pair(o->augment_valid, "augment-valid", false);
    pair(o->valid, "valid", command == "grid");
    if (o->augment_valid.given() && !o->augment.given()) {
      errors.push_back("--augment-valid-* requires --augment-text and --augment-relations");
    }
    if (command == "grid") {
      for (int len : o->grid.max_seq_lens) {
        if (len <= 0) errors.push_back("--grid-max-seq-len values must be positive");
      }
      if (o->grid.size() == 0) errors.push_back("the grid is empty");
    }
  } else if (command == "predict") {
    need(o->model_path, "--model");
    pair(o->test, "test", true);
  } else if (command == "evaluate") {
    need(o->gold, "--gold");
    need(o->predictions, "--predictions");
  }
  return errors;
}

std::string Timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// Run record written next to every command's artifacts.
class Manifest {
 public:
  Manifest(std::string command, const Options &o) : command_(std::move(command)) {
    record_["command"] = command_;
    record_["started_at"] = Timestamp();
    record_["seed"] = o.train_cfg.seed;
    record_["config"] = {
        {"train", json::parse(o.train_cfg.to_json())},
        {"model", json::parse(model_config_to_json(o.model_cfg))},
        {"preprocess",
         {{"max_seq_len", o.pre_cfg.max_seq_len},
          {"position_window", o.pre_cfg.position_window},
          {"lowercase", o.pre_cfg.lowercase},
          {"number_token", o.pre_cfg.number_token}}},
        {"task", o.task},
        {"macro_over", o.macro_over},
        {"vocab_limit", o.vocab_limit ? json(*o.vocab_limit) : json(nullptr)},
        {"word_dim", o.word_dim},
        {"parallel", o.parallel},
        {"repeats", o.repeats},
    };
    record_["inputs"] = json::array();
    record_["artifacts"] = json::object();
  }

  void input(const std::string &role, const std::string &path) {
    if (path.empty()) return;
    record_["inputs"].push_back({{"role", role}, {"path", path}, {"sha256", file_sha256(path)}});
  }
  void artifact(const std::string &role, const fs::path &path) {
    record_["artifacts"][role] = path.string();
  }
  void set(const std::string &key, json value) { record_[key] = std::move(value); }

  fs::path write(const fs::path &dir) {
    record_["finished_at"] = Timestamp();
    const fs::path path = dir / (command_ + "_manifest.json");
    std::ofstream f(path);
    f << record_.dump(2) << "\n";
    if (!f) throw LoadError("cannot write '" + path.string() + "'");
    return path;
  }

 private:
  std::string command_;
  json record_;
};

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw LoadError("cannot write '" + path.string() + "'");
}

SourceTag PrimaryTag(const Options &o) {
  return o.task == "1.2" ? SourceTag::kTask12 : SourceTag::kTask11;
}
SourceTag PartnerTag(const Options &o) {
  return o.task == "1.2" ? SourceTag::kTask11 : SourceTag::kTask12;
}

Corpus Load(const CorpusFiles &files, SourceTag tag) {
  return load_corpus(files.text, files.relations, tag);
}

// Appends b to a; both come from the same source.
Corpus Concat(Corpus a, const Corpus &b) {
  a.documents.insert(a.documents.end(), b.documents.begin(), b.documents.end());
  a.relations.insert(a.relations.end(), b.relations.begin(), b.relations.end());
  return a;
}

// A corpus together with its resolved relations. Not movable: the
// resolved pointers refer into `corpus`.
struct Dataset {
  explicit Dataset(Corpus c) : corpus(std::move(c)), resolved(resolve(corpus)) {}
  Dataset(const Dataset &) = delete;
  Dataset &operator=(const Dataset &) = delete;

  Corpus corpus;
  std::vector<ResolvedRelation> resolved;
};

std::unique_ptr<Dataset> MakeDataset(Corpus corpus) {
  return std::make_unique<Dataset>(std::move(corpus));
}

// The training corpus, merged with the partner task when augmenting.
std::unique_ptr<Dataset> TrainingData(const Options &o) {
  Corpus primary = Load(o.train, PrimaryTag(o));
  if (!o.train_cfg.augment) return MakeDataset(std::move(primary));
  Corpus partner = Load(o.augment, PartnerTag(o));
  if (o.augment_valid.given()) partner = Concat(std::move(partner), Load(o.augment_valid, PartnerTag(o)));
  return MakeDataset(augment(primary, partner));
}

void CollectTokens(const Corpus &corpus, const PreprocessConfig &cfg,
                   std::set<std::string> *tokens) {
  for (const Document &doc : corpus.documents) {
    for (const std::string *segment : {&doc.title, &doc.abstract}) {
      for (auto &token : segment_text(*segment, cfg).tokens) tokens->insert(token);
    }
  }
}

struct WordSetup {
  Vocabulary vocab;
  EmbeddingTable<float> table;
};

// Pretrained vectors restricted to the corpus vocabulary, or a random
// table over the training tokens when no vector file is given.
WordSetup BuildWords(const Options &o, const std::vector<const Corpus *> &training,
                     const std::vector<const Corpus *> &others) {
  std::set<std::string> tokens;
  for (const Corpus *c : training) CollectTokens(*c, o.pre_cfg, &tokens);
  WordSetup out;
  if (!o.embeddings.empty()) {
    for (const Corpus *c : others) CollectTokens(*c, o.pre_cfg, &tokens);
    const std::unordered_set<std::string> keep(tokens.begin(), tokens.end());
    LoadOptions opts;
    opts.vocab_limit = o.vocab_limit;
    opts.restrict_to = &keep;
    opts.seed = derive_seed(o.train_cfg.seed, 7);
    opts.trainable = o.model_cfg.fine_tune_words;
    auto loaded = load_pretrained(o.embeddings, opts);
    out.vocab = std::move(loaded.vocab);
    out.table = std::move(loaded.table);
    return out;
  }
  for (const auto &t : tokens) out.vocab.add(t);
  out.table = random_table<float>(out.vocab.size(), o.word_dim, derive_seed(o.train_cfg.seed, 7));
  std::fill(out.table.matrix.row(Vocabulary::kPad).begin(),
            out.table.matrix.row(Vocabulary::kPad).end(), 0.0f);
  out.table.frozen_row = Vocabulary::kPad;
  out.table.trainable = o.model_cfg.fine_tune_words;
  return out;
}

InstanceSet Instances(const Dataset &data, const Vocabulary &vocab, PreprocessConfig cfg,
                      int max_seq_len) {
  cfg.max_seq_len = max_seq_len;
  return build_instances(data.resolved, vocab, cfg);
}

// One predicted record per resolved relation, in order.
std::vector<RelationRecord> PredictRelations(const Dataset &data, const InstanceSet &set,
                                             const ModelParams<float> &params,
                                             const ModelConfig &cfg) {
  std::vector<RelationRecord> out;
  for (std::size_t i = 0; i < data.resolved.size(); ++i) {
    RelationRecord rel = *data.resolved[i].rel;
    const int idx = set.instance_of[i];
    rel.label = idx >= 0 ? predict(set.instances[idx], params, cfg).label : kFallbackLabel;
    out.push_back(std::move(rel));
  }
  return out;
}

// Scores predictions against gold records matched by argument pair.
ScoreReport ScoreRelations(const std::vector<RelationRecord> &gold,
                           const std::vector<RelationRecord> &pred, MacroOver macro_over) {
  std::map<std::pair<std::string, std::string>, Relation> by_pair;
  for (const RelationRecord &p : pred) {
    if (!p.label) {
      throw ParseError("prediction '" + format_relation(p) + "' has no label");
    }
    by_pair[{p.arg1_id, p.arg2_id}] = *p.label;
  }
  std::vector<Relation> g, q;
  for (const RelationRecord &rel : gold) {
    if (!rel.label) {
      throw ParseError("gold relation '" + format_relation(rel) + "' has no label");
    }
    const auto it = by_pair.find({rel.arg1_id, rel.arg2_id});
    if (it == by_pair.end()) {
      throw ResolveError("no prediction for gold relation '" + format_relation(rel) + "'");
    }
    g.push_back(*rel.label);
    q.push_back(it->second);
  }
  return score(g, q, macro_over);
}

std::string RelationLines(const std::vector<RelationRecord> &records) {
  std::string out;
  for (const auto &r : records) out += format_relation(r) + "\n";
  return out;
}

double Percentile(std::vector<int> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t rank = static_cast<std::size_t>(std::ceil(q * values.size()));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

void PrintPercentiles(std::ostream &out, const std::string &what, const std::vector<int> &v) {
  out << what << ": n=" << v.size();
  for (double q : {0.5, 0.9, 0.95, 0.99, 1.0}) {
    out << " p" << static_cast<int>(q * 100) << "=" << Percentile(v, q);
  }
  out << "\n";
}

int CmdInspect(const Options &o, std::ostream &out) {
  Manifest manifest("inspect", o);
  manifest.input("train_text", o.train.text);
  manifest.input("train_relations", o.train.relations);
  const auto data = MakeDataset(Load(o.train, PrimaryTag(o)));
  const Corpus &corpus = data->corpus;

  out << "documents: " << corpus.documents.size() << "\n";
  out << "relations: " << corpus.relations.size() << "\n";
  const LabelCounts hist = class_histogram(corpus);
  for (int c = 0; c < kNumRelations; ++c) {
    out << "  " << std::left << std::setw(12) << kRelationNames[c] << hist[c] << "\n";
  }

  std::vector<int> lengths, distances;
  for (const ResolvedRelation &r : data->resolved) {
    const auto seg = segment_text(r.doc->segment(r.e1->in_title), o.pre_cfg);
    lengths.push_back(static_cast<int>(seg.tokens.size()));
    try {
      distances.push_back(std::abs(head_position(seg, *r.e1) - head_position(seg, *r.e2)));
    } catch (const InstanceError &) {
    }
  }
  PrintPercentiles(out, "segment tokens", lengths);
  PrintPercentiles(out, "head distance", distances);

  Vocabulary vocab;
  std::set<std::string> tokens;
  CollectTokens(corpus, o.pre_cfg, &tokens);
  for (const auto &t : tokens) vocab.add(t);
  const InstanceSet set = Instances(*data, vocab, o.pre_cfg, o.pre_cfg.max_seq_len);
  out << "instances: " << set.instances.size() << " (max_seq_len " << o.pre_cfg.max_seq_len
      << "), failures: " << set.failures.size() << "\n";
  for (const auto &f : set.failures) {
    out << "  " << format_relation(*f.rel) << ": " << f.reason << "\n";
  }

  if (!o.dump_instances.empty()) {
    std::string lines;
    for (const auto &inst : set.instances) lines += instance_to_json(inst) + "\n";
    WriteText(o.dump_instances, lines);
    manifest.artifact("instances", o.dump_instances);
  }
  if (!o.dump_corpus.empty()) {
    WriteText(o.dump_corpus, dump_corpus(corpus));
    manifest.artifact("corpus", o.dump_corpus);
  }
  fs::create_directories(o.out_dir);
  manifest.write(o.out_dir);
  return kExitOk;
}

int CmdTrain(const Options &o, std::ostream &out) {
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  Manifest manifest("train", o);
  manifest.input("train_text", o.train.text);
  manifest.input("train_relations", o.train.relations);
  manifest.input("augment_text", o.augment.text);
  manifest.input("augment_relations", o.augment.relations);
  manifest.input("augment_valid_text", o.augment_valid.text);
  manifest.input("augment_valid_relations", o.augment_valid.relations);
  manifest.input("valid_text", o.valid.text);
  manifest.input("valid_relations", o.valid.relations);
  manifest.input("embeddings", o.embeddings);

  const auto train_data = TrainingData(o);
  std::unique_ptr<Dataset> valid;
  if (o.valid.given()) valid = MakeDataset(Load(o.valid, PrimaryTag(o)));
  std::vector<const Corpus *> others;
  if (valid) others.push_back(&valid->corpus);
  const WordSetup words = BuildWords(o, {&train_data->corpus}, others);

  const InstanceSet train_set =
      Instances(*train_data, words.vocab, o.pre_cfg, o.train_cfg.max_seq_len);
  out << "training instances: " << train_set.instances.size()
      << " (skipped " << train_set.failures.size() << ")\n";
  const auto result = train<float>(train_set.instances, o.train_cfg, o.model_cfg, words.table);

  SavedModel saved{o.model_cfg, o.pre_cfg, words.vocab, result.params};
  const fs::path model_path = dir / "model.ckpt";
  save_model(model_path, saved);
  manifest.artifact("model", model_path);

  std::string log = json{{"epoch", 0}, {"loss", result.log.initial_loss}, {"mode", "infer"}}.dump() + "\n";
  for (std::size_t e = 0; e < result.log.epoch_loss.size(); ++e) {
    log += json{{"epoch", e + 1}, {"loss", result.log.epoch_loss[e]}, {"mode", "train"}}.dump() + "\n";
  }
  WriteText(dir / "train_log.jsonl", log);
  manifest.artifact("train_log", dir / "train_log.jsonl");
  out << "initial loss " << result.log.initial_loss;
  if (!result.log.epoch_loss.empty()) out << ", final epoch loss " << result.log.epoch_loss.back();
  out << "\n";

  if (valid) {
    const InstanceSet vset = Instances(*valid, words.vocab, o.pre_cfg, o.train_cfg.max_seq_len);
    const auto predicted = PredictRelations(*valid, vset, result.params, o.model_cfg);
    const ScoreReport report =
        ScoreRelations(valid->corpus.relations, predicted, *parse_macro_over(o.macro_over));
    WriteText(dir / "validation.json", report_to_json(report) + "\n");
    WriteText(dir / "validation_predictions.txt", RelationLines(predicted));
    manifest.artifact("validation_report", dir / "validation.json");
    manifest.artifact("validation_predictions", dir / "validation_predictions.txt");
    manifest.set("validation_macro_f1", report.macro_f1);
    out << "validation macro-F1 " << std::setprecision(17) << report.macro_f1 << "\n";
  }
  manifest.write(dir);
  return kExitOk;
}

int CmdGrid(const Options &o, std::ostream &out, std::ostream &err) {
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  Manifest manifest("grid", o);
  manifest.input("train_text", o.train.text);
  manifest.input("train_relations", o.train.relations);
  manifest.input("augment_text", o.augment.text);
  manifest.input("augment_relations", o.augment.relations);
  manifest.input("augment_valid_text", o.augment_valid.text);
  manifest.input("augment_valid_relations", o.augment_valid.relations);
  manifest.input("valid_text", o.valid.text);
  manifest.input("valid_relations", o.valid.relations);
  manifest.input("embeddings", o.embeddings);
  manifest.set("grid", {{"epochs", o.grid.epochs},
                        {"max_seq_len", o.grid.max_seq_lens},
                        {"batch_size", o.grid.batch_sizes},
                        {"n_filters", o.grid.n_filters},
                        {"learning_rate", o.grid.learning_rates}});

  const auto train_data = TrainingData(o);
  const auto valid = MakeDataset(Load(o.valid, PrimaryTag(o)));
  const WordSetup words = BuildWords(o, {&train_data->corpus}, {&valid->corpus});
  const InstanceProvider train_provider = [&](int len) {
    return Instances(*train_data, words.vocab, o.pre_cfg, len).instances;
  };
  const InstanceProvider valid_provider = [&](int len) {
    return Instances(*valid, words.vocab, o.pre_cfg, len).instances;
  };

  const fs::path log_path = dir / "grid.jsonl";
  std::ofstream log(log_path);
  if (!log) throw LoadError("cannot write '" + log_path.string() + "'");
  GridOptions opts;
  opts.parallelism = o.parallel;
  opts.repeats = o.repeats;
  opts.macro_over = *parse_macro_over(o.macro_over);
  const std::size_t total = o.grid.size();
  opts.on_trial = [&](const TrialResult &t) {
    json line = json::parse(t.config.to_json());
    line["trial"] = t.index;
    line["macro_f1"] = t.macro_f1;
    line["repeat_f1"] = t.repeat_f1;
    line["final_loss"] = t.epoch_loss.empty() ? json(nullptr) : json(t.epoch_loss.back());
    log << line.dump() << "\n" << std::flush;
    err << "trial " << t.index + 1 << "/" << total << " macro-F1 " << t.macro_f1 << "\n";
  };
  const GridResult result = grid_search(train_provider, valid_provider, o.grid,
                                        o.train_cfg.seed, o.train_cfg.augment, o.model_cfg,
                                        words.table, opts);
  manifest.artifact("trials", log_path);

  std::ostringstream table;
  table << std::left << std::setw(6) << "trial" << std::setw(8) << "epochs" << std::setw(8)
        << "seqlen" << std::setw(7) << "batch" << std::setw(9) << "filters" << std::setw(8)
        << "lr" << "macro-F1\n";
  for (const TrialResult &t : result.trials) {
    table << std::left << std::setw(6) << t.index << std::setw(8) << t.config.epochs
          << std::setw(8) << t.config.max_seq_len << std::setw(7) << t.config.batch_size
          << std::setw(9) << t.config.n_filters << std::setw(8) << t.config.learning_rate
          << std::fixed << std::setprecision(4) << t.macro_f1 << std::defaultfloat
          << (t.index == result.best ? "  *" : "") << "\n";
  }
  WriteText(dir / "grid_summary.txt", table.str());
  manifest.artifact("summary", dir / "grid_summary.txt");
  out << table.str();

  const TrialResult &best = result.best_trial();
  WriteText(dir / "best_config.json", best.config.to_json() + "\n");
  manifest.artifact("best_config", dir / "best_config.json");
  manifest.set("best_trial", best.index);
  manifest.set("best_macro_f1", best.macro_f1);
  out << "best trial " << best.index << " macro-F1 " << best.macro_f1 << "\n";

  if (o.final_fit) {
    const auto fit = final_fit({train_provider, valid_provider}, best.config, o.model_cfg,
                               words.table);
    PreprocessConfig pre = o.pre_cfg;
    pre.max_seq_len = best.config.max_seq_len;
    SavedModel saved{with_train_config(o.model_cfg, best.config), pre, words.vocab, fit.params};
    save_model(dir / "model.ckpt", saved);
    manifest.artifact("model", dir / "model.ckpt");
    out << "final fit: initial loss " << fit.log.initial_loss << ", final epoch loss "
        << (fit.log.epoch_loss.empty() ? fit.log.initial_loss : fit.log.epoch_loss.back())
        << "\n";
  }
  manifest.write(dir);
  return kExitOk;
}

int CmdPredict(const Options &o, std::ostream &out) {
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  Manifest manifest("predict", o);
  manifest.input("model", o.model_path);
  manifest.input("test_text", o.test.text);
  manifest.input("test_relations", o.test.relations);

  const SavedModel model = load_model(o.model_path);
  const auto data = MakeDataset(Load(o.test, PrimaryTag(o)));
  const InstanceSet set = build_instances(data->resolved, model.vocab, model.preprocess);
  const auto predicted = PredictRelations(*data, set, model.params, model.model);
  const fs::path path = o.predictions.empty() ? dir / "predictions.txt" : fs::path(o.predictions);
  WriteText(path, RelationLines(predicted));
  manifest.artifact("predictions", path);
  manifest.set("fallback_predictions", set.failures.size());
  out << "predicted " << predicted.size() << " relations (" << set.failures.size()
      << " without an instance, labelled " << relation_name(kFallbackLabel) << ")\n";
  manifest.write(dir);
  return kExitOk;
}

int CmdEvaluate(const Options &o, std::ostream &out) {
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  Manifest manifest("evaluate", o);
  manifest.input("gold", o.gold);
  manifest.input("predictions", o.predictions);
  const auto gold = parse_relations(read_file(o.gold));
  const auto pred = parse_relations(read_file(o.predictions));
  const ScoreReport report = ScoreRelations(gold, pred, *parse_macro_over(o.macro_over));
  const fs::path path = o.report.empty() ? dir / "evaluation.json" : fs::path(o.report);
  WriteText(path, report_to_json(report) + "\n");
  manifest.artifact("report", path);
  manifest.set("macro_f1", report.macro_f1);
  out << report_to_text(report);
  out << "macro-F1 " << std::setprecision(17) << report.macro_f1 << "\n";
  manifest.write(dir);
  return kExitOk;
}

}  // namespace

std::string file_sha256(const std::string &path) {
  const std::string bytes = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX *ctx = EVP_MD_CTX_new();
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw LoadError("cannot hash '" + path + "'");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Piecewise CNN relation classification", "relpcnn"};
  app.set_config("--config", "", "Key-value configuration file; flags override it");
  app.fallthrough();
  app.require_subcommand(1);
  Options o;
  AddOptions(app, &o);
  app.add_subcommand("inspect", "Corpus statistics and optional dumps");
  app.add_subcommand("train", "Train one configuration");
  app.add_subcommand("grid", "Grid search over the hyperparameter table");
  app.add_subcommand("predict", "Label candidate relations with a trained model");
  app.add_subcommand("evaluate", "Score a prediction file against gold relations");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto errors = Finalize(command, &o);
    if (!errors.empty()) {
      std::string msg = "invalid configuration:";
      for (const auto &e : errors) msg += "\n  " + e;
      throw ConfigError(msg);
    }
    if (command == "inspect") return CmdInspect(o, out);
    if (command == "train") return CmdTrain(o, out);
    if (command == "grid") return CmdGrid(o, out, err);
    if (command == "predict") return CmdPredict(o, out);
    return CmdEvaluate(o, out);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::kConfig:
        return kExitConfig;
      case ErrorKind::kData:
        return kExitData;
      case ErrorKind::kNumeric:
        return kExitNumeric;
    }
    return kExitConfig;
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace relpcnn
