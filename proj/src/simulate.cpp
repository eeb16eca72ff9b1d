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

#include "stereoscore/simulate.hpp"

#include <cmath>
#include <numeric>

#include "stereoscore/error.hpp"

namespace stereoscore {

std::vector<double> exponential_strengths(std::size_t n, double divisor) {
  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) {
    theta[i] = std::exp(static_cast<double>(i) / divisor);
  }
  const double total = std::accumulate(theta.begin(), theta.end(), 0.0);
  for (double& t : theta) t /= total;
  return theta;
}

std::vector<std::size_t> sample_pl_ranking(std::span<const double> weights,
                                           Rng& rng) {
  std::vector<std::size_t> left(weights.size());
  std::iota(left.begin(), left.end(), std::size_t{0});
  std::vector<std::size_t> ranking;
  ranking.reserve(weights.size());
  while (!left.empty()) {
    double total = 0.0;
    for (std::size_t i : left) total += weights[i];
    double u = uniform01(rng) * total;
    std::size_t pick = left.size() - 1;
    for (std::size_t k = 0; k < left.size(); ++k) {
      u -= weights[left[k]];
      if (u < 0.0) {
        pick = k;
        break;
      }
    }
    ranking.push_back(left[pick]);
    left.erase(left.begin() + static_cast<long>(pick));
  }
  return ranking;
}

std::vector<PairwiseComparison> simulate_luce_comparisons(
    std::span<const std::string> ids, std::span<const double> theta,
    std::size_t n, Rng& rng) {
  if (ids.size() < 2 || ids.size() != theta.size()) {
    throw ValidationError("need at least two items with strengths");
  }
  std::vector<PairwiseComparison> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(uniform_index(rng, ids.size()));
    auto j = static_cast<std::size_t>(uniform_index(rng, ids.size() - 1));
    if (j >= i) ++j;
    const bool i_wins = uniform01(rng) < theta[i] / (theta[i] + theta[j]);
    out.push_back({i_wins ? ids[i] : ids[j], i_wins ? ids[j] : ids[i],
                   "sim-" + std::to_string(k), Origin::resolved()});
  }
  return out;
}

OracleAnnotator::OracleAnnotator(
    std::unordered_map<std::string, double> strengths, Mode mode)
    : strengths_(std::move(strengths)), mode_(mode) {}

double OracleAnnotator::strength(const std::string& id) const {
  const auto it = strengths_.find(id);
  if (it == strengths_.end()) {
    throw NotFoundError("oracle has no strength for '" + id + "'");
  }
  return it->second;
}

std::pair<int, int> OracleAnnotator::pick(const Quaternion& tuple,
                                          Rng& rng) const {
  std::array<double, kTupleSize> w{};
  for (std::size_t k = 0; k < kTupleSize; ++k) {
    w[k] = strength(tuple.sentence_ids[k]);
  }
  if (mode_ == Mode::kNoiseless) {
    int best = 0;
    int worst = 0;
    for (int k = 1; k < static_cast<int>(kTupleSize); ++k) {
      if (w[static_cast<std::size_t>(k)] > w[static_cast<std::size_t>(best)]) best = k;
      if (w[static_cast<std::size_t>(k)] < w[static_cast<std::size_t>(worst)]) worst = k;
    }
    if (best == worst) worst = best == 0 ? 1 : 0;
    return {best, worst};
  }
  const auto ranking = sample_pl_ranking(w, rng);
  return {static_cast<int>(ranking.front()), static_cast<int>(ranking.back())};
}

std::vector<Annotation> simulate_annotations(std::span<const Quaternion> tuples,
                                             const OracleAnnotator& annotator,
                                             const std::string& annotator_id,
                                             std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<Annotation> out;
  out.reserve(tuples.size());
  std::int64_t ts = 1'700'000'000;
  for (const auto& t : tuples) {
    const auto [best, worst] = annotator.pick(t, rng);
    out.push_back({t.tuple_id, annotator_id, best, worst, ts++});
  }
  return out;
}

}  // namespace stereoscore
