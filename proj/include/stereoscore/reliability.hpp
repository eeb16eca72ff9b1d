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

// Agreement and reliability diagnostics for fitted scores, and kernel
// density summaries of score distributions.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stereoscore/annotation_store.hpp"
#include "stereoscore/corpus.hpp"
#include "stereoscore/plackett_luce.hpp"
#include "stereoscore/scores.hpp"

namespace stereoscore {

// Product-moment correlation. Throws ValidationError on a length mismatch or
// fewer than two points, NumericalError when either vector is constant.
double pearson(std::span<const double> x, std::span<const double> y);

// Pearson over the ids present in both tables; nullopt when fewer than two
// ids are shared or either side is constant there.
struct TableCorrelation {
  std::optional<double> r;
  std::size_t n_common = 0;
};
TableCorrelation correlate_tables(const ScoreTable& a, const ScoreTable& b);

struct AgreementResult {
  std::string annotator_a;
  std::string annotator_b;
  double r = 0.0;
  std::size_t n_common = 0;
};

// Fits one score table per annotator from that annotator's picks alone and
// correlates them. Uses the two named annotators, or the first two in sorted
// order. Throws PrerequisiteError with fewer than two annotators and
// NotFoundError for an annotator without annotations.
AgreementResult inter_annotator_agreement(
    const AnnotationStore::State& state, const ScorerConfig& scorer = {},
    std::optional<std::pair<std::string, std::string>> annotators = {});

struct SplitHalfOptions {
  std::size_t n_splits = 100;
  std::uint64_t seed = 0;
  ScorerConfig scorer;
  ScoringPolicy policy = ScoringPolicy::pooled();
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct ReliabilityReport {
  std::optional<double> inter_annotator_r;
  double shr_mean_r = 0.0;
  std::vector<double> shr_per_split;
  std::size_t n_splits = 0;
  std::uint64_t seed = 0;
  // Splits with an empty half or no usable common support.
  std::vector<std::size_t> skipped_splits;
};

// Correlation between independent fits on two halves; nullopt when either
// half is empty or the fits share too little support.
std::optional<double> split_correlation(
    std::span<const PairwiseComparison> half_a,
    std::span<const PairwiseComparison> half_b, const ScorerConfig& scorer);

// Partitions the annotated tuples (each with all of its comparisons under
// `policy`) into two halves per split, floor(m/2) and the rest. Split k
// draws from make_rng(seed, k), so the thread count does not change the
// result. Throws PrerequisiteError with fewer than two annotated tuples.
ReliabilityReport split_half_reliability(const AnnotationStore::State& state,
                                         const SplitHalfOptions& opts);

nlohmann::json report_to_json(const ReliabilityReport& report);

// ---------------------------------------------------------------------------
// Kernel density

enum class GroupBy { kBiasType, kSource, kGroupRole, kAll };
GroupBy parse_group_by(std::string_view s);

struct KdeOptions {
  std::optional<double> bandwidth;  // nullopt = Silverman
  std::size_t grid_points = 512;
  double lo = -1.05;
  double hi = 1.05;
};

struct DensityCurve {
  std::string group;
  std::size_t n = 0;
  double mean = 0.0;
  double bandwidth = 0.0;
  std::vector<double> x;
  std::vector<double> density;
};

// Silverman's rule, 0.9 * min(sd, IQR/1.34) * n^(-1/5), falling back to sd
// alone and then to 0.05 when the spread is zero.
double silverman_bandwidth(std::span<const double> values);

// Gaussian KDE on an even grid, rescaled so its trapezoid integral over the
// grid is exactly 1.
DensityCurve kernel_density(std::span<const double> values,
                            const KdeOptions& opts = {});

struct DensitySummary {
  std::vector<DensityCurve> curves;  // sorted by group
  std::vector<std::string> warnings;
};

// Groups scored ids by a corpus attribute. Scored ids missing from the
// corpus and corpus groups with no scored member produce warnings.
DensitySummary kernel_density_summary(const ScoreTable& scores,
                                      const Corpus& corpus, GroupBy group_by,
                                      const KdeOptions& opts = {});

double trapezoid(std::span<const double> x, std::span<const double> y);

// CSV `group,x,density`.
std::string density_to_csv(const DensitySummary& summary);

}  // namespace stereoscore
