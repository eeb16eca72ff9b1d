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
#include <set>

#include "doctest.h"
#include "stereoscore/error.hpp"
#include "stereoscore/random.hpp"
#include "test_util.hpp"

using namespace stereoscore;

namespace {

std::vector<std::string> make_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
  return ids;
}

// Histogram over the whole id list, zero counts included.
std::vector<std::size_t> counts(const std::vector<std::string>& ids,
                                const std::vector<Quaternion>& tuples) {
  const auto h = occurrence_histogram(tuples);
  std::vector<std::size_t> out;
  for (const auto& id : ids) {
    const auto it = h.find(id);
    out.push_back(it == h.end() ? 0 : it->second);
  }
  return out;
}

bool distinct(const Quaternion& q) {
  std::set<std::string> s(q.sentence_ids.begin(), q.sentence_ids.end());
  return s.size() == kTupleSize;
}

}  // namespace

TEST_CASE("paper-scale balance: 2976 sentences, 8799 tuples") {
  const auto ids = make_ids(2976);
  const auto tuples = sample_tuples(ids, 8799, 13);
  REQUIRE(tuples.size() == 8799);
  const auto c = counts(ids, tuples);
  CHECK(std::count(c.begin(), c.end(), 12u) == 2460);
  CHECK(std::count(c.begin(), c.end(), 11u) == 516);
  CHECK(std::all_of(tuples.begin(), tuples.end(), distinct));
}

TEST_CASE("small forced cases") {
  SUBCASE("4 sentences, 1 tuple") {
    const auto ids = make_ids(4);
    const auto t = sample_tuples(ids, 1, 0);
    const auto c = counts(ids, t);
    CHECK(std::all_of(c.begin(), c.end(), [](auto v) { return v == 1; }));
  }
  SUBCASE("8 sentences, 2 tuples, seeds 0..9") {
    const auto ids = make_ids(8);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto t = sample_tuples(ids, 2, seed);
      const auto c = counts(ids, t);
      CHECK(std::all_of(c.begin(), c.end(), [](auto v) { return v == 1; }));
      CHECK(std::all_of(t.begin(), t.end(), distinct));
    }
  }
}

TEST_CASE("balance and distinctness over random sizes") {
  Rng rng = make_rng(4242);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n_items = 4 + uniform_index(rng, 197);
    const std::size_t n_tuples = 1 + uniform_index(rng, 500);
    const auto ids = make_ids(n_items);
    const auto t = sample_tuples(ids, n_tuples, static_cast<std::uint64_t>(trial));
    REQUIRE(t.size() == n_tuples);
    const auto c = counts(ids, t);
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    CHECK_MESSAGE(*hi - *lo <= 1, "items=" << n_items << " tuples=" << n_tuples);
    CHECK(std::all_of(t.begin(), t.end(), distinct));
  }
}

TEST_CASE("determinism") {
  const auto ids = make_ids(50);
  CHECK(sample_tuples(ids, 77, 5) == sample_tuples(ids, 77, 5));
  CHECK_FALSE(sample_tuples(ids, 77, 5) == sample_tuples(ids, 77, 6));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(sample_tuples(make_ids(3), 1, 0), ValidationError);
  CHECK_THROWS_AS(sample_tuples(make_ids(10), 0, 0), ValidationError);
}

TEST_CASE("occurrence_histogram") {
  const Quaternion a{"t1", {"a", "b", "c", "d"}};
  const Quaternion b{"t2", {"a", "e", "f", "g"}};
  const std::vector<Quaternion> one{a};
  const auto h1 = occurrence_histogram(one);
  CHECK(h1.size() == 4);
  CHECK(h1.at("a") == 1);
  CHECK(occurrence_histogram({}).empty());
  const std::vector<Quaternion> two{a, b};
  const auto h2 = occurrence_histogram(two);
  CHECK(h2.at("a") == 2);
  std::size_t total = 0;
  for (const auto& [id, n] : h2) total += n;
  CHECK(total == 8);
}

TEST_CASE("tuples file round trip and validation") {
  testutil::TempDir dir;
  Corpus corpus;
  for (const auto& id : make_ids(9)) {
    corpus.push_back({id, "text " + id, "race", Source::kSS, GroupRole::kNone, {}});
  }
  const auto t = sample_tuples(corpus, 6, 1);
  CHECK_NOTHROW(validate_tuples(t, &corpus));
  save_tuples(t, dir / "tuples.jsonl");
  CHECK(load_tuples(dir / "tuples.jsonl") == t);

  std::vector<Quaternion> bad{{"x", {"s0", "s0", "s1", "s2"}}};
  CHECK_THROWS_AS(validate_tuples(bad), ValidationError);
  std::vector<Quaternion> unknown{{"x", {"s0", "s1", "s2", "zz"}}};
  CHECK_THROWS(validate_tuples(unknown, &corpus));
}
