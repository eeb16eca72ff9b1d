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

// Statistical routines over (score, metadata) records: group mean
// comparisons with bootstrap intervals, ranking separability, sentiment
// buckets, paired disadvantaged/advantaged gaps and type ablation.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stereoscore/corpus.hpp"
#include "stereoscore/predictor.hpp"
#include "stereoscore/scores.hpp"

namespace stereoscore {

struct LabeledExample {
  std::string id;
  std::optional<std::string> text;
  double score = 0.0;
  std::optional<int> binary_label;
  std::vector<std::string> group_labels;
  std::optional<double> aux_score;         // e.g. toxicity
  std::optional<double> continuous_value;  // e.g. sentiment
  std::optional<GroupRole> pair_role;
  std::optional<std::string> pair_id;
  std::optional<std::string> bias_type;
};

// Throws ValidationError unless the score is in [-1, 1], the binary label is
// 0/1 and a pair role comes with a pair id.
void validate_example(const LabeledExample& e);

// ---------------------------------------------------------------------------
// Ingestion

enum class DatasetFormat {
  kEthosBinary,      // comment;isHate            (isHate >= 0.5 -> 1)
  kEthosMultilabel,  // comment;...;gender;race;national_origin;disability;
                     //   religion;sexual_orientation   (>= 0.5 -> group)
  kSexism,           // id?,text,toxicity,sexist
  kSst,              // id?,sentence|text,sentiment|label   (value in [0,1])
  kCpPairs,          // CrowS-Pairs CSV; two examples per row
  kGeneric,          // id,text?,score?,binary_label?,group_labels? ('|'),
                     //   aux_score?,continuous_value?,pair_role?,pair_id?,
                     //   bias_type?
};
DatasetFormat parse_dataset_format(std::string_view s);

// Separator is detected from the header line (';' or ','). Examples carry a
// zero score until scores are attached; generic rows with a score column
// keep it.
std::vector<LabeledExample> load_examples(const std::filesystem::path& path,
                                          DatasetFormat format);
std::vector<LabeledExample> parse_examples(std::string_view text, DatasetFormat format,
                                           std::string_view origin);

// Joins scores by id. Examples without a score are dropped and listed.
std::vector<std::string> attach_scores(std::vector<LabeledExample>& examples,
                                       const ScoreTable& scores);
// Scores every example from its text; throws ValidationError on a missing text.
void attach_predictions(std::vector<LabeledExample>& examples,
                        const RegressorModel& model);

// ---------------------------------------------------------------------------
// Group means

struct BootstrapOptions {
  std::size_t resamples = 2000;
  std::uint64_t seed = 0;
  double level = 0.95;
};

struct MeanCi {
  std::size_t n = 0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap of the mean, drawing from make_rng(opts.seed, stream).
MeanCi bootstrap_mean(std::span<const double> values, const BootstrapOptions& opts,
                      std::uint64_t stream);

struct GroupComparisonReport {
  MeanCi group0;
  MeanCi group1;
  double difference = 0.0;  // mean(group1) - mean(group0)
  double diff_lo = 0.0;
  double diff_hi = 0.0;
  std::size_t unlabeled = 0;
  BootstrapOptions bootstrap;
};

// Splits on binary_label. Throws ValidationError when a class is empty.
GroupComparisonReport group_mean_comparison(std::span<const LabeledExample> examples,
                                            const BootstrapOptions& opts = {});

struct GroupStat {
  std::string group;
  MeanCi stat;
};

// An example counts once toward each of its group labels. Sorted by mean,
// highest first, then by name.
std::vector<GroupStat> per_group_means(std::span<const LabeledExample> examples,
                                       const BootstrapOptions& opts = {});

// ---------------------------------------------------------------------------
// Separability

enum class RankingField { kScore, kAuxScore };

// ROC-AUC of the field against binary_label, ties worth 1/2. Throws
// ValidationError with a single class or a missing field.
double ranking_separability(std::span<const LabeledExample> examples, RankingField field);

struct SeparabilityReport {
  double auc_score = 0.0;
  std::optional<double> auc_aux;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
};
SeparabilityReport separability_report(std::span<const LabeledExample> examples);

// ---------------------------------------------------------------------------
// Sentiment buckets

inline constexpr std::array<double, 5> kSentimentEdges{0.2, 0.4, 0.6, 0.8, 1.0};

// Index of the left-open, right-closed bucket holding v, or nullopt outside
// (0, 1].
std::optional<std::size_t> sentiment_bucket(double v);

struct BucketStat {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
  std::optional<double> mean;
};

struct SentimentReport {
  std::array<BucketStat, 5> buckets;
  // Every bucket populated and each mean strictly below the previous one.
  bool strictly_decreasing = false;
  std::vector<std::string> rejected;  // ids without a usable value
};
SentimentReport sentiment_bucket_analysis(std::span<const LabeledExample> examples);

// ---------------------------------------------------------------------------
// Paired gaps

struct TypeGap {
  std::string bias_type;
  std::size_t n_pairs = 0;
  double mean_disadvantaged = 0.0;
  double mean_advantaged = 0.0;
  double gap = 0.0;  // disadvantaged - advantaged
};

struct PairGapReport {
  std::vector<TypeGap> per_type;  // sorted by bias type
  std::vector<std::string> incomplete_pairs;
};

// Throws ValidationError naming the pair id when a pair has two members of
// one role.
PairGapReport paired_group_gap(std::span<const LabeledExample> examples);

// ---------------------------------------------------------------------------
// Ablation

struct AblationConfig {
  std::string drop;
  TrainConfig train;
  SplitRatios ratios;
  std::uint64_t seed = 0;
};

struct AblationCell {
  std::optional<double> r;  // nullopt when undefined
  std::size_t n = 0;
};

struct AblationRow {
  std::string bias_type;
  AblationCell disadvantaged;
  AblationCell advantaged;
  AblationCell all;
};

struct AblationResult {
  std::string dropped;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t n_test = 0;
  std::vector<AblationRow> rows;      // target types in first-seen order
  std::vector<std::string> attributed;  // types at the row minimum of `all`
};

// Drops every corpus sentence of type `drop`, re-splits, retrains and
// correlates predictions on the target examples with `reference` per target
// bias type and pair role. An undefined correlation ranks as the minimum.
// Throws ValidationError when the type is absent or fewer than 5 training
// records remain.
AblationResult ablation_run(const Corpus& corpus, const ScoreTable& gold,
                            const AblationConfig& config,
                            std::span<const LabeledExample> target,
                            const ScoreTable& reference);

// ---------------------------------------------------------------------------
// Output

nlohmann::json to_json(const GroupComparisonReport& r);
nlohmann::json to_json(const std::vector<GroupStat>& groups, const BootstrapOptions& opts);
nlohmann::json to_json(const SeparabilityReport& r);
nlohmann::json to_json(const SentimentReport& r);
nlohmann::json to_json(const PairGapReport& r);
nlohmann::json to_json(const AblationResult& r);

enum class ScatterX { kAuxScore, kContinuous };

// CSV `id,class,x,score`. Class is the binary label, else the sentiment
// bucket (1-5). With `per_class`, at most that many rows per class are kept
// by a seeded draw.
std::string scatter_csv(std::span<const LabeledExample> examples, ScatterX x,
                        std::optional<std::size_t> per_class, std::uint64_t seed);

}  // namespace stereoscore
