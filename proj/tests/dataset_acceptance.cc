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

// Reference scores on the shared-task data. Needs PCNN_SEMEVAL_DIR, holding
// the release files 1.1.text.xml, 1.1.relations.txt, 1.1.test.text.xml,
// keys.test.1.1.txt and their 1.2 counterparts, and PCNN_EMBEDDINGS, a
// word2vec text file. Exits 77 (skipped) when either is unset.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "relpcnn/cli.h"
#include "relpcnn/corpus.h"
#include "relpcnn/eval.h"

namespace fs = std::filesystem;

namespace {

constexpr int kSkip = 77;
constexpr double kMinGain = 5.0;
constexpr double kBand = 8.0;

struct Setting {
  std::string task;
  bool augment;
  int epochs;
  int batch_size;
  int n_filters;
};

// The tuned configurations reported for each task and data condition.
const Setting kSettings[] = {
    {"1.1", false, 200, 32, 64},
    {"1.1", true, 200, 64, 32},
    {"1.2", false, 200, 32, 64},
    {"1.2", true, 100, 64, 128},
};

std::string Partner(const std::string &task) { return task == "1.1" ? "1.2" : "1.1"; }

// Test macro-F1 in percent, or a negative value if the run failed.
double Run(const fs::path &data, const std::string &embeddings, const fs::path &out,
           const Setting &s) {
  std::vector<std::string> args = {
      "train",
      "--task", s.task,
      "--train-text", (data / (s.task + ".text.xml")).string(),
      "--train-relations", (data / (s.task + ".relations.txt")).string(),
      "--valid-text", (data / (s.task + ".test.text.xml")).string(),
      "--valid-relations", (data / ("keys.test." + s.task + ".txt")).string(),
      "--embeddings", embeddings,
      "--epochs", std::to_string(s.epochs),
      "--batch-size", std::to_string(s.batch_size),
      "--n-filters", std::to_string(s.n_filters),
      "--max-seq-len", "200",
      "--learning-rate", "0.001",
      "--out-dir", out.string()};
  if (s.augment) {
    const std::string p = Partner(s.task);
    args.insert(args.end(), {"--augment", "--augment-text", (data / (p + ".text.xml")).string(),
                             "--augment-relations", (data / (p + ".relations.txt")).string()});
  }
  std::ostringstream o, e;
  if (relpcnn::run_cli(args, o, e) != 0) {
    std::cerr << e.str();
    return -1;
  }
  const auto manifest =
      nlohmann::json::parse(relpcnn::read_file(out / "train_manifest.json"));
  return 100.0 * manifest["validation_macro_f1"].get<double>();
}

}  // namespace

int main() {
  const char *data = std::getenv("PCNN_SEMEVAL_DIR");
  const char *embeddings = std::getenv("PCNN_EMBEDDINGS");
  if (data == nullptr || embeddings == nullptr) {
    std::cout << "SKIP criterion 8 (reference scores): set PCNN_SEMEVAL_DIR and "
                 "PCNN_EMBEDDINGS to run" << std::endl;
    return kSkip;
  }
  const fs::path out = fs::temp_directory_path() / "relpcnn_dataset_acceptance";
  fs::remove_all(out);

  // Class histogram of the Task 1.1 training relations.
  const auto corpus = relpcnn::load_corpus(fs::path(data) / "1.1.text.xml",
                                           fs::path(data) / "1.1.relations.txt",
                                           relpcnn::SourceTag::kTask11);
  const auto hist = relpcnn::class_histogram(corpus);
  const bool usage_dominant =
      std::max_element(hist.begin(), hist.end()) == hist.begin();

  bool pass = usage_dominant;
  std::ostringstream detail;
  detail << (usage_dominant ? "USAGE is the largest class" : "USAGE is NOT the largest class");
  double scores[4];
  for (int i = 0; i < 4; ++i) {
    const Setting &s = kSettings[i];
    scores[i] = Run(data, embeddings, out / std::to_string(i), s);
    const double ref =
        *relpcnn::reference_macro_f1(s.task, s.augment ? "1.1 + 1.2" : s.task);
    const bool within = scores[i] >= 0 && std::abs(scores[i] - ref) <= kBand;
    pass = pass && within;
    detail << "; task " << s.task << (s.augment ? " augmented " : " ") << scores[i]
           << " vs " << ref << (within ? "" : " (outside band)");
  }
  for (int t = 0; t < 2; ++t) {
    const double gain = scores[2 * t + 1] - scores[2 * t];
    pass = pass && gain >= kMinGain;
    detail << "; gain " << kSettings[2 * t].task << " " << gain;
  }
  std::cout << (pass ? "PASS" : "FAIL") << " criterion 8 (reference scores): " << detail.str()
            << std::endl;
  return pass ? 0 : 1;
}
