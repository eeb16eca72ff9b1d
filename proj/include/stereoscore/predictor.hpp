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

// Text-to-score regression: dataset splits, a hashed n-gram ridge baseline,
// evaluation, and import of predictions produced elsewhere.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stereoscore/corpus.hpp"
#include "stereoscore/scores.hpp"

namespace stereoscore {

enum class Split { kTrain, kVal, kTest };
std::string_view to_string(Split s);

struct ScoredRecord {
  Sentence sentence;
  double gold = 0.0;
  Split split = Split::kTrain;
};

struct ScoredDataset {
  std::vector<ScoredRecord> records;  // input order
  std::vector<std::string> unscored;  // corpus ids without a gold score

  std::vector<ScoredRecord> subset(Split s) const;
  std::size_t count(Split s) const;
};

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

// Joins corpus and scores on id, then tags floor(train*N) records train,
// floor(val*N) val and the rest test, in the order of a seeded shuffle.
// Throws ValidationError when N < 5 or the ratios do not sum to 1.
ScoredDataset split_dataset(const Corpus& corpus, const ScoreTable& scores,
                            const SplitRatios& ratios = {}, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Features

struct FeatureConfig {
  std::uint32_t dim = 1u << 18;
  int word_min = 1;
  int word_max = 2;
  int char_min = 3;
  int char_max = 5;

  bool operator==(const FeatureConfig&) const = default;
};

// Sorted by index, duplicates merged, L2 norm 1 (empty for empty text).
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

// Lowercased word n-grams over alphanumeric runs (bytes >= 0x80 count as
// word characters) and character n-grams of " text ", each hashed with
// 64-bit FNV-1a into dim buckets with a sign taken from the top hash bit.
SparseVector featurize(std::string_view text, const FeatureConfig& config);

// ---------------------------------------------------------------------------
// Baseline regressor

struct TrainConfig {
  FeatureConfig features;
  double lambda = 1e-4;  // ridge penalty, on the intercept as well
  int epochs = 300;
  double lr = 0.4;
  bool clip = true;
};

class RegressorModel {
 public:
  RegressorModel() = default;
  RegressorModel(FeatureConfig features, double lambda, bool clip,
                 double intercept, std::vector<double> weights);

  double predict(std::string_view text) const;
  double predict(const SparseVector& x) const;
  ScoreTable predict(const Corpus& corpus) const;

  const FeatureConfig& features() const { return features_; }
  double lambda() const { return lambda_; }
  bool clip() const { return clip_; }
  double intercept() const { return intercept_; }
  const std::vector<double>& weights() const { return weights_; }

  nlohmann::json to_json() const;
  static RegressorModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static RegressorModel load(const std::filesystem::path& path);

 private:
  FeatureConfig features_;
  double lambda_ = 0.0;
  bool clip_ = true;
  double intercept_ = 0.0;
  std::vector<double> weights_;
};

struct TrainResult {
  RegressorModel model;
  std::vector<double> loss_history;  // objective before each epoch, then final
};

// Full-batch gradient descent from zero weights, intercept at the target
// mean, on
//   mean (f(x) - y)^2 + lambda (|w|^2 + b^2).
// Throws ValidationError on empty input and NumericalError when the
// objective exceeds 10x its initial value.
TrainResult train_baseline(std::span<const ScoredRecord> train,
                           const TrainConfig& config = {});

// ---------------------------------------------------------------------------
// Evaluation and import

struct EvalMetrics {
  double mse = 0.0;
  std::optional<double> pearson_r;  // nullopt when either side is constant
  std::size_t n = 0;
};

// Over the ids present in both tables. Throws ValidationError when none are.
EvalMetrics evaluate(const ScoreTable& predictions, const ScoreTable& gold);

nlohmann::json metrics_to_json(const EvalMetrics& m);

struct ImportedScores {
  ScoreTable table;
  std::vector<std::string> clipped_ids;  // values outside [-1, 1]
};

// Reads the scores CSV layout (`id,score[,theta]`). Scores outside [-1, 1]
// are clipped and listed. Throws FormatError on a missing column or a bad
// number.
ImportedScores import_external_predictions(const std::filesystem::path& path);
ImportedScores parse_scores_csv(std::string_view text, std::string_view origin);

}  // namespace stereoscore
