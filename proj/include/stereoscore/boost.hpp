// Copyright 2026 The stereoscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Score-augmented linear classification: does appending a stereotype score
// to a fixed embedding help a linear classifier?

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "stereoscore/scores.hpp"

namespace stereoscore {

struct EmbeddedExample {
  std::string id;
  std::vector<double> embedding;
  int label = 0;
  double score = 0.0;
};

// Shared embedding dimension. Throws ValidationError on ragged embeddings,
// labels outside {0, 1} or scores outside [-1, 1].
std::size_t validate_embedded(std::span<const EmbeddedExample> data);

// Embedding followed by the score.
std::vector<double> augment_features(const EmbeddedExample& e);

// ---------------------------------------------------------------------------
// Classifier

struct LinearConfig {
  // Step size as a fraction of 1/L, L being a bound on the curvature of the
  // mean loss. Values up to 1 never increase the loss.
  double lr = 1.0;
  std::size_t epochs = 500;
  double l2 = 1e-4;
};

// Logistic regression over standardized features.
class LinearClassifier {
 public:
  LinearClassifier() = default;
  LinearClassifier(std::vector<double> mean, std::vector<double> inv_scale,
                   std::vector<double> weights, double bias);

  double probability(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return probability(x) >= 0.5; }

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  std::vector<double> mean_;
  std::vector<double> inv_scale_;  // 0 for constant features
  std::vector<double> weights_;
  double bias_ = 0.0;
};

struct LinearTrainResult {
  LinearClassifier model;
  std::vector<double> loss_history;  // regularized mean loss before each epoch, then final
};

// Full-batch gradient descent from zero weights. Throws ValidationError with
// fewer than 2 examples, ragged rows, or a single class.
LinearTrainResult train_linear_classifier(const std::vector<std::vector<double>>& features,
                                          std::span<const int> labels,
                                          const LinearConfig& config = {});

struct BinaryMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double positive_f1 = 0.0;
};

// F1 of a class that is never predicted and never present counts as 0.
BinaryMetrics binary_metrics(std::span<const int> predicted, std::span<const int> truth);

// ---------------------------------------------------------------------------
// Harness

struct BoostOptions {
  std::size_t n_runs = 5;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  std::size_t max_retries = 100;
  LinearConfig classifier;
};

struct BoostRun {
  std::uint64_t seed = 0;  // seed + run index
  std::size_t attempts = 1;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  BinaryMetrics baseline;
  BinaryMetrics augmented;
};

struct BoostReport {
  std::size_t n_runs = 0;
  std::vector<BoostRun> runs;
  BinaryMetrics mean_baseline;
  BinaryMetrics mean_augmented;
};

// Test/train indices of one run; the test share is floor(fraction * n), at
// least 1. Both sides hold both classes or PrerequisiteError is thrown after
// max_retries reshuffles.
struct BoostSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::size_t attempts = 1;
};
BoostSplit boost_split(std::span<const EmbeddedExample> data, std::uint64_t run_seed,
                       const BoostOptions& opts);

// Throws ValidationError with fewer than 10 examples or a single class.
BoostReport evaluate_boost(std::span<const EmbeddedExample> data, const BoostOptions& opts = {});

nlohmann::json boost_report_to_json(const BoostReport& report, const BoostOptions& opts);

// ---------------------------------------------------------------------------
// Ingestion

struct EmbeddingRow {
  std::string id;
  int label = 0;
  std::vector<double> embedding;
};

enum class LabelScheme {
  kBinary,  // 0/1 labels as given
  kHsol,    // three-way class column, 0 = hate; everything else becomes 0
};

// CSV `id,label,v0..v{d-1}`, or a raw little-endian float32 row-major file
// with a `<file>.json` sidecar {"d", "n", "ids", "labels"}.
std::vector<EmbeddingRow> load_embeddings(const std::filesystem::path& path,
                                          LabelScheme scheme = LabelScheme::kBinary);
std::vector<EmbeddingRow> parse_embeddings_csv(std::string_view text, LabelScheme scheme,
                                               std::string_view origin);

struct JoinedExamples {
  std::vector<EmbeddedExample> examples;
  std::vector<std::string> missing_scores;
};
JoinedExamples join_scores(std::span<const EmbeddingRow> rows, const ScoreTable& scores);

}  // namespace stereoscore
