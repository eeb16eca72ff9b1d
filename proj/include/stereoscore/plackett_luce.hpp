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

// Plackett-Luce strengths from pairwise comparisons via Iterative Luce
// Spectral Ranking (ILSR), and the map from strengths to scores in [-1, 1].
//
// ILSR repeatedly builds a continuous-time Markov chain whose rate from
// loser l to winner w is the number of times w beat l divided by
// (theta_w + theta_l) under the current strengths, and replaces the
// strengths by the chain's stationary distribution. Its fixed point is the
// maximum-likelihood estimate. A uniform rate alpha/n between every ordered
// pair of items keeps the chain irreducible; the fixed point then maximizes
//
//   sum_{w > l} log(theta_w / (theta_w + theta_l)) + (alpha/n) sum_i log theta_i
//
// over the simplex.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stereoscore/annotation_store.hpp"
#include "stereoscore/scores.hpp"

namespace stereoscore {

// Comparisons aggregated over an indexed item universe.
class ComparisonSet {
 public:
  struct Edge {
    std::size_t winner;
    std::size_t loser;
    double count;
  };

  ComparisonSet() = default;

  // Item universe = `universe` when given (comparisons naming any other id
  // are rejected), else every id in first-appearance order.
  static ComparisonSet from(std::span<const PairwiseComparison> comparisons,
                            std::span<const std::string> universe = {});

  // Direct construction over an index space; used by tests and simulations.
  static ComparisonSet from_indices(std::vector<std::string> items,
                                    std::span<const Edge> edges);

  const std::vector<std::string>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  // Distinct (winner, loser) pairs with multiplicities, in first-seen order.
  const std::vector<Edge>& edges() const { return edges_; }
  double total_count() const;

  std::optional<std::size_t> index_of(std::string_view id) const;

  // Items that appear in no comparison.
  std::vector<std::size_t> unobserved() const;

  // Strongly connected components of the directed graph loser -> winner,
  // each as sorted item indices. One component means the unregularized MLE
  // exists.
  std::vector<std::vector<std::size_t>> strong_components() const;

  ComparisonSet scaled(double k) const;

 private:
  void add(std::size_t winner, std::size_t loser, double count);

  std::vector<std::string> items_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, std::size_t> edge_index_;  // (w << 32) | l
};

// Positive strengths on the simplex.
struct StrengthVector {
  std::vector<std::string> item_ids;
  std::vector<double> theta;

  // Throws ValidationError unless all theta > 0 and sum(theta) = 1 within
  // 1e-9.
  void validate() const;
  std::optional<double> of(std::string_view id) const;
};

// Generator of a continuous-time Markov chain: sparse comparison rates plus
// a uniform off-diagonal rate. Diagonal entries close every row to zero.
class RateMatrix {
 public:
  RateMatrix(std::size_t n, double uniform_rate);

  std::size_t size() const { return n_; }
  double uniform_rate() const { return uniform_; }

  void add_rate(std::size_t from, std::size_t to, double rate);

  // Off-diagonal rate from -> to, or the diagonal when from == to.
  double rate(std::size_t from, std::size_t to) const;
  double diagonal(std::size_t i) const;
  double max_exit_rate() const;

  // Row-major n x n copy. Meant for tests and small chains.
  std::vector<double> dense() const;

  // out = pi * Q.
  void left_multiply(std::span<const double> pi, std::span<double> out) const;

 private:
  std::size_t n_;
  double uniform_;
  // Outgoing sparse rates per row, merged per target.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
  std::vector<double> exit_sparse_;
};

// Builds the ILSR chain for strengths `theta` (indexed like `comparisons`).
// Throws ValidationError on non-positive theta or size mismatch.
RateMatrix build_chain(const ComparisonSet& comparisons,
                       std::span<const double> theta, double alpha);

struct StationaryOptions {
  double tol = 1e-9;
  std::size_t max_iter = 10'000;
};

struct StationaryResult {
  std::vector<double> pi;
  std::size_t iterations = 0;
  double residual = 0.0;  // ||pi P - pi||_1 = ||pi Q||_1 / lambda
};

// Power iteration on the uniformized chain P = I + Q / lambda with
// lambda = max|diagonal| + 1, starting from `start` (uniform when empty).
// Stops once a step moves pi by at most tol in L1; throws NumericalError
// carrying that residual after max_iter steps.
StationaryResult stationary_distribution(const RateMatrix& q,
                                         const StationaryOptions& opts = {},
                                         std::span<const double> start = {});

struct IlsrOptions {
  double alpha = 0.1;
  double tol = 1e-8;  // on ||theta' - theta||_1
  std::size_t max_iter = 100;
  StationaryOptions inner;
  // Chains with at most this many states are solved by direct elimination
  // instead of power iteration.
  std::size_t direct_limit = 512;
};

struct IlsrFit {
  StrengthVector strengths;
  std::size_t iterations = 0;
  bool converged = false;
  double last_change = 0.0;
  std::vector<std::string> unobserved;
};

// Throws NumericalError listing components when alpha == 0 and the
// comparison graph is not strongly connected. Above direct_limit each step
// runs stationary_distribution; when that exhausts its budget on a chain of
// at most 512 states, the step falls back to the direct solve.
IlsrFit ilsr_fit(const ComparisonSet& comparisons, const IlsrOptions& opts = {});

IlsrFit ilsr_fit(std::span<const PairwiseComparison> comparisons,
                 const IlsrOptions& opts = {},
                 std::span<const std::string> universe = {});

// sum over comparisons of log(theta_w / (theta_w + theta_l)); always <= 0.
double log_likelihood(const ComparisonSet& comparisons,
                      std::span<const double> theta);

// The objective ILSR maximizes: log_likelihood + (alpha/n) sum log theta.
double regularized_log_likelihood(const ComparisonSet& comparisons,
                                  std::span<const double> theta, double alpha);

struct ScoreTransform {
  // nullopt = auto: the scale that makes the 1st..99th percentile band of
  // centered log-strengths one unit wide, i.e. roughly [-0.5, 0.5].
  std::optional<double> scale;
  double alpha = 0.0;  // recorded in provenance only
};

// score_i = clip((log theta_i - mean_j log theta_j) / scale, -1, 1).
ScoreTable to_scores(const StrengthVector& strengths,
                     const ScoreTransform& transform = {},
                     std::span<const std::string> unobserved = {});

// ILSR fit followed by to_scores, the path every consumer of comparisons
// takes.
struct ScorerConfig {
  IlsrOptions ilsr;
  std::optional<double> scale;  // nullopt = auto
};

ScoreTable fit_scores(std::span<const PairwiseComparison> comparisons,
                      const ScorerConfig& config = {},
                      std::span<const std::string> universe = {});

// The auto scale for a strength vector (1 when the band is degenerate).
double auto_scale(std::span<const double> theta);

// Linear-interpolation percentile (q in [0, 1]) of unsorted data.
double percentile(std::vector<double> data, double q);

}  // namespace stereoscore
