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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stereoscore/corpus.hpp"

namespace stereoscore {

inline constexpr std::size_t kTupleSize = 4;

// Four distinct sentences shown together for one best-worst judgment.
struct Quaternion {
  std::string tuple_id;
  std::array<std::string, kTupleSize> sentence_ids;

  bool operator==(const Quaternion&) const = default;
};

// Samples `n_tuples` quaternions so that every sentence occurs either
// floor(4n/N) or ceil(4n/N) times. Deterministic for fixed
// (corpus order, n_tuples, seed).
//
// Slots are the multiset of balanced copies, shuffled, then cut into
// consecutive groups of four; a group holding the same sentence twice is
// repaired by swapping the offending slot with one from another group that
// keeps both groups duplicate-free.
std::vector<Quaternion> sample_tuples(const Corpus& corpus,
                                      std::size_t n_tuples,
                                      std::uint64_t seed);

// Same, over bare ids.
std::vector<Quaternion> sample_tuples(std::span<const std::string> ids,
                                      std::size_t n_tuples,
                                      std::uint64_t seed);

std::map<std::string, std::size_t> occurrence_histogram(
    std::span<const Quaternion> tuples);

// Throws ValidationError on a repeated id inside a tuple, duplicate
// tuple_id, or (when `corpus` is non-null) an id absent from the corpus.
void validate_tuples(std::span<const Quaternion> tuples,
                     const Corpus* corpus = nullptr);

// {"tuple_id": str, "sentence_ids": [str, str, str, str]} per line.
std::vector<Quaternion> load_tuples(const std::filesystem::path& path);
void save_tuples(std::span<const Quaternion> tuples,
                 const std::filesystem::path& path);

}  // namespace stereoscore
