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

// Planted-model annotators for scripted runs and recovery checks.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stereoscore/annotation_store.hpp"
#include "stereoscore/random.hpp"

namespace stereoscore {

// theta_i proportional to exp(i / divisor), normalized to the simplex.
std::vector<double> exponential_strengths(std::size_t n, double divisor);

// A Plackett-Luce ranking of indices 0..n-1: repeatedly draw the next item
// with probability proportional to its weight among those left.
std::vector<std::size_t> sample_pl_ranking(std::span<const double> weights,
                                           Rng& rng);

// n independent pairwise contests between uniformly drawn distinct items,
// won with probability theta_w / (theta_w + theta_l).
std::vector<PairwiseComparison> simulate_luce_comparisons(
    std::span<const std::string> ids, std::span<const double> theta,
    std::size_t n, Rng& rng);

// Answers best/worst questions from planted strengths.
class OracleAnnotator {
 public:
  enum class Mode {
    kNoiseless,      // best = strongest, worst = weakest
    kPlackettLuce,   // best/worst = first/last of a sampled PL ranking
  };

  OracleAnnotator(std::unordered_map<std::string, double> strengths, Mode mode);

  // (best_index, worst_index)
  std::pair<int, int> pick(const Quaternion& tuple, Rng& rng) const;

  double strength(const std::string& id) const;

 private:
  std::unordered_map<std::string, double> strengths_;
  Mode mode_;
};

std::vector<Annotation> simulate_annotations(
    std::span<const Quaternion> tuples, const OracleAnnotator& annotator,
    const std::string& annotator_id, std::uint64_t seed);

}  // namespace stereoscore
