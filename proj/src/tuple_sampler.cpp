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

#include "stereoscore/tuple_sampler.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <unordered_set>

#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"
#include "stereoscore/random.hpp"

namespace stereoscore {

namespace {

std::string tuple_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%05zu", index);
  return buf;
}

// True when `value` occurs in the group of `pos`, ignoring `pos` itself.
bool group_holds(const std::vector<std::size_t>& slots, std::size_t pos,
                 std::size_t value) {
  const std::size_t base = pos - pos % kTupleSize;
  for (std::size_t k = base; k < base + kTupleSize; ++k) {
    if (k != pos && slots[k] == value) return true;
  }
  return false;
}

bool try_swap(std::vector<std::size_t>& slots, std::size_t p, std::size_t q) {
  if (group_holds(slots, p, slots[q]) || group_holds(slots, q, slots[p])) {
    return false;
  }
  std::swap(slots[p], slots[q]);
  return true;
}

void repair(std::vector<std::size_t>& slots) {
  const std::size_t n = slots.size();
  for (std::size_t g = 0; g < n; g += kTupleSize) {
    for (std::size_t p = g + 1; p < g + kTupleSize; ++p) {
      const bool dup = std::find(slots.begin() + static_cast<long>(g),
                                 slots.begin() + static_cast<long>(p),
                                 slots[p]) != slots.begin() + static_cast<long>(p);
      if (!dup) continue;
      bool fixed = false;
      // Later groups first, then already-repaired earlier groups.
      for (std::size_t q = g + kTupleSize; q < n && !fixed; ++q) {
        fixed = try_swap(slots, p, q);
      }
      for (std::size_t q = 0; q < g && !fixed; ++q) {
        fixed = try_swap(slots, p, q);
      }
      if (!fixed) {
        throw NumericalError("tuple sampler could not separate duplicate in "
                             "tuple " + std::to_string(g / kTupleSize));
      }
    }
  }
}

}  // namespace

std::vector<Quaternion> sample_tuples(std::span<const std::string> ids,
                                      std::size_t n_tuples,
                                      std::uint64_t seed) {
  const std::size_t n_items = ids.size();
  if (n_items < kTupleSize) {
    throw ValidationError("tuple sampling needs at least 4 sentences, got " +
                          std::to_string(n_items));
  }
  if (n_tuples < 1) throw ValidationError("n_tuples must be at least 1");

  Rng rng = make_rng(seed);
  const std::size_t n_slots = kTupleSize * n_tuples;
  const std::size_t base = n_slots / n_items;
  const std::size_t extra = n_slots % n_items;

  // Which sentences get the extra copy is itself a seeded draw, so that
  // corpus order does not decide who is over-represented.
  std::vector<std::size_t> order(n_items);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);

  std::vector<std::size_t> slots;
  slots.reserve(n_slots);
  for (std::size_t i = 0; i < n_items; ++i) {
    slots.insert(slots.end(), base, i);
  }
  for (std::size_t k = 0; k < extra; ++k) slots.push_back(order[k]);
  shuffle(slots, rng);
  repair(slots);

  std::vector<Quaternion> tuples(n_tuples);
  for (std::size_t t = 0; t < n_tuples; ++t) {
    tuples[t].tuple_id = tuple_name(t);
    for (std::size_t k = 0; k < kTupleSize; ++k) {
      tuples[t].sentence_ids[k] = ids[slots[t * kTupleSize + k]];
    }
  }
  return tuples;
}

std::vector<Quaternion> sample_tuples(const Corpus& corpus,
                                      std::size_t n_tuples,
                                      std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& s : corpus) ids.push_back(s.id);
  return sample_tuples(ids, n_tuples, seed);
}

std::map<std::string, std::size_t> occurrence_histogram(
    std::span<const Quaternion> tuples) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : tuples) {
    for (const auto& id : t.sentence_ids) ++counts[id];
  }
  return counts;
}

void validate_tuples(std::span<const Quaternion> tuples, const Corpus* corpus) {
  std::unordered_set<std::string> known;
  if (corpus) {
    for (const auto& s : *corpus) known.insert(s.id);
  }
  std::unordered_set<std::string> tuple_ids;
  for (const auto& t : tuples) {
    if (!tuple_ids.insert(t.tuple_id).second) {
      throw ValidationError("duplicate tuple_id '" + t.tuple_id + "'");
    }
    for (std::size_t a = 0; a < kTupleSize; ++a) {
      for (std::size_t b = a + 1; b < kTupleSize; ++b) {
        if (t.sentence_ids[a] == t.sentence_ids[b]) {
          throw ValidationError("tuple '" + t.tuple_id + "' repeats id '" +
                                t.sentence_ids[a] + "'");
        }
      }
      if (corpus && !known.contains(t.sentence_ids[a])) {
        throw ValidationError("tuple '" + t.tuple_id +
                              "' references unknown sentence '" +
                              t.sentence_ids[a] + "'");
      }
    }
  }
}

std::vector<Quaternion> load_tuples(const std::filesystem::path& path) {
  std::vector<Quaternion> tuples;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    Quaternion q;
    q.tuple_id = j.at("tuple_id").get<std::string>();
    const Json& ids = j.at("sentence_ids");
    if (!ids.is_array() || ids.size() != kTupleSize) {
      throw FormatError(path.string() + ":" + std::to_string(line) +
                        ": sentence_ids must hold exactly 4 ids");
    }
    for (std::size_t k = 0; k < kTupleSize; ++k) {
      q.sentence_ids[k] = ids[k].get<std::string>();
    }
    tuples.push_back(std::move(q));
  });
  validate_tuples(tuples);
  return tuples;
}

void save_tuples(std::span<const Quaternion> tuples,
                 const std::filesystem::path& path) {
  std::string out;
  for (const auto& t : tuples) {
    nlohmann::ordered_json j;
    j["tuple_id"] = t.tuple_id;
    j["sentence_ids"] = t.sentence_ids;
    out += j.dump() + "\n";
  }
  write_file(path, out);
}

}  // namespace stereoscore
