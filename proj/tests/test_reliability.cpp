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

#include "stereoscore/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "doctest.h"
#include "oracles.hpp"
#include "stereoscore/error.hpp"
#include "stereoscore/random.hpp"
#include "stereoscore/simulate.hpp"

using namespace stereoscore;

namespace {

std::vector<std::string> make_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
  return ids;
}

std::unordered_map<std::string, double> planted(const std::vector<std::string>& ids,
                                                double divisor) {
  const auto theta = exponential_strengths(ids.size(), divisor);
  std::unordered_map<std::string, double> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = theta[i];
  return out;
}

void annotate(AnnotationStore& store, const OracleAnnotator& who,
              const std::string& id, std::uint64_t seed) {
  for (const auto& a : simulate_annotations(store.tuples(), who, id, seed)) {
    store.record_annotation(a);
  }
}

}  // namespace

TEST_CASE("pearson examples") {
  const std::vector<double> x{1, 2, 3};
  CHECK(pearson(x, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson(x, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}) ==
        doctest::Approx(0.8));
  CHECK_THROWS_AS(pearson(x, std::vector<double>{5, 5, 5}), NumericalError);
  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), ValidationError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}),
                  ValidationError);
}

TEST_CASE("pearson properties") {
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 40);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = standard_normal(rng);
      y[i] = x[i] * 0.3 + standard_normal(rng);
    }
    const double r = pearson(x, y);
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
    CHECK(r == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-12));
    CHECK(pearson(y, x) == doctest::Approx(r).epsilon(1e-12));
    std::vector<double> x2 = x;
    for (double& v : x2) v = 3.5 * v - 7.0;
    CHECK(pearson(x2, y) == doctest::Approx(r).epsilon(1e-9));
  }
}

TEST_CASE("inter_annotator_agreement") {
  const auto ids = make_ids(100);
  const auto tuples = sample_tuples(ids, 1000, 3);

  SUBCASE("identical annotators") {
    AnnotationStore store(tuples);
    const OracleAnnotator o(planted(ids, 10.0), OracleAnnotator::Mode::kPlackettLuce);
    annotate(store, o, "A", 1);
    annotate(store, o, "B", 1);
    const auto res = inter_annotator_agreement(*store.snapshot());
    CHECK(res.r == doctest::Approx(1.0));
    CHECK(res.n_common == 100);
  }
  SUBCASE("independent draws from one planted model") {
    AnnotationStore store(tuples);
    const OracleAnnotator o(planted(ids, 10.0), OracleAnnotator::Mode::kPlackettLuce);
    annotate(store, o, "A", 11);
    annotate(store, o, "B", 12);
    const auto res = inter_annotator_agreement(*store.snapshot());
    MESSAGE("planted-model agreement r = " << res.r);
    CHECK(res.r >= 0.8);
  }
  SUBCASE("errors") {
    AnnotationStore store(tuples);
    const OracleAnnotator o(planted(ids, 10.0), OracleAnnotator::Mode::kNoiseless);
    annotate(store, o, "A", 1);
    CHECK_THROWS_AS(inter_annotator_agreement(*store.snapshot()), PrerequisiteError);
    CHECK_THROWS_AS(
        inter_annotator_agreement(*store.snapshot(), {}, std::pair{std::string("A"),
                                                                   std::string("Q")}),
        NotFoundError);
  }
}

TEST_CASE("split_half_reliability") {
  const auto ids = make_ids(20);
  const auto tuples = sample_tuples(ids, 400, 8);
  AnnotationStore store(tuples);
  const OracleAnnotator o(planted(ids, 1.0), OracleAnnotator::Mode::kNoiseless);
  annotate(store, o, "A", 0);
  const auto state = store.snapshot();

  SUBCASE("noiseless planted model") {
    SplitHalfOptions opts;
    opts.n_splits = 50;
    opts.seed = 17;
    const auto rep = split_half_reliability(*state, opts);
    REQUIRE(rep.shr_per_split.size() == 50);
    CHECK(rep.skipped_splits.empty());
    CHECK(rep.shr_mean_r >= 0.9);
    double mean = 0.0;
    for (double r : rep.shr_per_split) {
      CHECK(r >= -1.0);
      CHECK(r <= 1.0);
      mean += r;
    }
    CHECK(std::abs(rep.shr_mean_r - mean / 50.0) < 1e-12);
  }
  SUBCASE("deterministic, independent of thread count") {
    SplitHalfOptions opts;
    opts.n_splits = 1;
    opts.seed = 99;
    const auto a = split_half_reliability(*state, opts);
    const auto b = split_half_reliability(*state, opts);
    CHECK(a.shr_per_split == b.shr_per_split);
    opts.n_splits = 12;
    opts.threads = 1;
    const auto serial = split_half_reliability(*state, opts);
    opts.threads = 5;
    const auto parallel = split_half_reliability(*state, opts);
    CHECK(serial.shr_per_split == parallel.shr_per_split);
    CHECK(serial.shr_per_split.front() == a.shr_per_split.front());
  }
  SUBCASE("identical halves correlate perfectly") {
    const auto cs = state->comparisons(ScoringPolicy::pooled());
    const auto r = split_correlation(cs, cs, {});
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(1.0));
  }
  SUBCASE("empty half is skipped") {
    const auto cs = state->comparisons(ScoringPolicy::pooled());
    CHECK_FALSE(split_correlation(cs, {}, {}).has_value());
  }
  SUBCASE("report json") {
    SplitHalfOptions opts;
    opts.n_splits = 3;
    auto rep = split_half_reliability(*state, opts);
    rep.inter_annotator_r = 0.5;
    const auto j = report_to_json(rep);
    CHECK(j.at("n_splits") == 3);
    CHECK(j.at("shr_per_split").size() == 3);
    CHECK(j.at("inter_annotator_r") == 0.5);
  }
  SUBCASE("needs two tuples") {
    AnnotationStore tiny(std::vector<Quaternion>(tuples.begin(), tuples.begin() + 1));
    annotate(tiny, o, "A", 0);
    CHECK_THROWS_AS(split_half_reliability(*tiny.snapshot(), {}), PrerequisiteError);
  }
}

TEST_CASE("kernel_density") {
  SUBCASE("single point") {
    const std::vector<double> v{0.3};
    const auto c = kernel_density(v);
    const auto peak = std::max_element(c.density.begin(), c.density.end()) - c.density.begin();
    const double step = c.x[1] - c.x[0];
    CHECK(std::abs(c.x[static_cast<std::size_t>(peak)] - 0.3) <= step);
    CHECK(c.mean == doctest::Approx(0.3));
    CHECK(std::abs(trapezoid(c.x, c.density) - 1.0) < 1e-2);
  }
  SUBCASE("symmetric sample") {
    const std::vector<double> v{-0.4, 0.4};
    const auto c = kernel_density(v);
    CHECK(std::abs(c.mean) < 1e-15);
    const std::size_t n = c.x.size();
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(c.density[i] == doctest::Approx(c.density[n - 1 - i]).epsilon(1e-9));
    }
  }
  SUBCASE("integral close to one for arbitrary samples") {
    Rng rng = make_rng(1);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 1 + uniform_index(rng, 200);
      std::vector<double> v(n);
      for (double& x : v) x = std::clamp(0.4 * standard_normal(rng), -1.0, 1.0);
      const auto c = kernel_density(v);
      CHECK(c.x.size() == 512);
      CHECK(c.x.front() == doctest::Approx(-1.05));
      CHECK(c.x.back() == doctest::Approx(1.05));
      CHECK(std::abs(trapezoid(c.x, c.density) - 1.0) < 1e-2);
    }
  }
  SUBCASE("silverman") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    // sd = 1.5811, IQR/1.34 = 1.4925 -> 0.9 * 1.4925 * 5^-0.2
    CHECK(silverman_bandwidth(v) == doctest::Approx(0.9 * (2.0 / 1.34) * std::pow(5.0, -0.2)));
    CHECK(silverman_bandwidth(std::vector<double>{0.2}) == 0.05);
  }
}

TEST_CASE("kernel_density_summary") {
  Corpus corpus;
  auto add = [&](std::string id, std::string bias) {
    corpus.push_back({id, "t", std::move(bias), Source::kSS, GroupRole::kNone, {}});
  };
  add("a", "race");
  add("b", "race");
  add("c", "gender");
  add("d", "religion");
  const ScoreTable scores({{"a", 0.1, {}}, {"b", 0.3, {}}, {"c", -0.2, {}}, {"zz", 0.0, {}}});
  const auto sum = kernel_density_summary(scores, corpus, GroupBy::kBiasType);
  REQUIRE(sum.curves.size() == 2);
  CHECK(sum.curves[0].group == "gender");
  CHECK(sum.curves[1].group == "race");
  CHECK(sum.curves[1].mean == doctest::Approx(0.2));
  CHECK(sum.warnings.size() == 2);
  const auto csv = density_to_csv(sum);
  CHECK(csv.starts_with("group,x,density\ngender,-1.05,"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 512);
  CHECK(parse_group_by("all") == GroupBy::kAll);
  CHECK_THROWS_AS(parse_group_by("colour"), ValidationError);
}
