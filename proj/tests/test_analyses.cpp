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

#include "stereoscore/analyses.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"
#include "stereoscore/random.hpp"
#include "test_util.hpp"

using namespace stereoscore;

namespace {

LabeledExample labeled(std::string id, double score, int label) {
  LabeledExample e;
  e.id = std::move(id);
  e.score = score;
  e.binary_label = label;
  return e;
}

std::vector<LabeledExample> from_arrays(const std::vector<double>& s, const std::vector<int>& l) {
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back(labeled("e" + std::to_string(i), s[i], l[i]));
  return out;
}

LabeledExample sentiment(std::string id, double value, double score) {
  LabeledExample e;
  e.id = std::move(id);
  e.score = score;
  e.continuous_value = value;
  return e;
}

LabeledExample member(std::string pair, GroupRole role, double score, std::string type) {
  LabeledExample e;
  e.id = pair + (role == GroupRole::kDisadvantaged ? "-d" : "-a");
  e.score = score;
  e.pair_role = role;
  e.pair_id = std::move(pair);
  e.bias_type = std::move(type);
  return e;
}

}  // namespace

TEST_CASE("ranking_separability fixtures") {
  CHECK(ranking_separability(from_arrays({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}), RankingField::kScore) == 1.0);
  CHECK(ranking_separability(from_arrays({0.9, 0.2, 0.8, 0.1}, {1, 0, 0, 1}), RankingField::kScore) == 0.5);
  CHECK(ranking_separability(from_arrays({0.3, 0.3, 0.3, 0.3}, {1, 0, 0, 1}), RankingField::kScore) == 0.5);
  CHECK_THROWS_AS(ranking_separability(from_arrays({0.1, 0.2}, {1, 1}), RankingField::kScore),
                  ValidationError);
}

TEST_CASE("ranking_separability agrees with pair enumeration") {
  Rng rng = make_rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4 + uniform_index(rng, 40);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse values so ties are common.
      s[i] = std::round(uniform01(rng) * 8.0) / 8.0 - 0.5;
      l[i] = i < 2 ? static_cast<int>(i) : uniform01(rng) < 0.4;
    }
    const auto ex = from_arrays(s, l);
    const double auc = ranking_separability(ex, RankingField::kScore);
    CHECK(auc == doctest::Approx(oracle::auc_pairs(s, l)).epsilon(1e-12));

    // Strictly increasing transform, applied through the aux field.
    auto moved = ex;
    for (auto& e : moved) e.aux_score = std::exp(3.0 * e.score) + 7.0;
    CHECK(ranking_separability(moved, RankingField::kAuxScore) ==
          doctest::Approx(auc).epsilon(1e-12));
  }
}

TEST_CASE("separability_report") {
  auto ex = from_arrays({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0});
  const double aux[] = {0.2, 0.9, 0.8, 0.1};
  for (std::size_t i = 0; i < ex.size(); ++i) ex[i].aux_score = aux[i];
  const auto rep = separability_report(ex);
  CHECK(rep.auc_score == 1.0);
  REQUIRE(rep.auc_aux);
  CHECK(*rep.auc_aux == 0.75);
  CHECK(rep.n_positive == 2);
  CHECK(rep.n_negative == 2);
  CHECK(to_json(rep)["score_separates_better"] == true);

  ex[0].aux_score.reset();
  CHECK_FALSE(separability_report(ex).auc_aux);
}

TEST_CASE("group_mean_comparison") {
  BootstrapOptions opts;
  opts.seed = 5;

  SUBCASE("equal groups") {
    const auto rep = group_mean_comparison(from_arrays({0.2, 0.2, 0.2, 0.2}, {0, 0, 1, 1}), opts);
    CHECK(rep.difference == 0.0);
    CHECK(rep.diff_lo == 0.0);
    CHECK(rep.diff_hi == 0.0);
    CHECK(rep.group0.n == 2);
  }
  SUBCASE("planted gap") {
    Rng rng = make_rng(3);
    std::vector<LabeledExample> ex;
    for (int i = 0; i < 60; ++i) {
      const double base = uniform01(rng) * 1.2 - 0.8;
      ex.push_back(labeled("a" + std::to_string(i), base, 0));
      ex.push_back(labeled("b" + std::to_string(i), base + 0.2, 1));
    }
    const auto rep = group_mean_comparison(ex, opts);
    CHECK(rep.difference == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(rep.diff_lo > 0.0);
    CHECK(rep.diff_hi > rep.diff_lo);
    CHECK(rep.group1.lo <= rep.group1.mean);
    CHECK(rep.group1.mean <= rep.group1.hi);

    auto swapped = ex;
    for (auto& e : swapped) e.binary_label = 1 - *e.binary_label;
    CHECK(group_mean_comparison(swapped, opts).difference ==
          doctest::Approx(-rep.difference).epsilon(1e-12));

    const auto again = group_mean_comparison(ex, opts);
    CHECK(again.diff_lo == rep.diff_lo);
    CHECK(to_json(rep)["bootstrap"]["seed"] == 5);
  }
  SUBCASE("unlabeled examples are counted") {
    auto ex = from_arrays({0.1, 0.3}, {0, 1});
    LabeledExample u;
    u.id = "u";
    ex.push_back(u);
    CHECK(group_mean_comparison(ex, opts).unlabeled == 1);
  }
  SUBCASE("single class") {
    CHECK_THROWS_AS(group_mean_comparison(from_arrays({0.1, 0.3}, {1, 1}), opts), ValidationError);
  }
}

TEST_CASE("bootstrap_mean interval") {
  const std::vector<double> v{0.1, 0.5, -0.2, 0.4, 0.0};
  const auto m = bootstrap_mean(v, {}, 0);
  CHECK(m.mean == doctest::Approx(0.16));
  CHECK(m.lo >= -0.2);
  CHECK(m.hi <= 0.5);
  CHECK(m.lo < m.mean);
  CHECK(m.hi > m.mean);
  CHECK_THROWS_AS(bootstrap_mean(std::vector<double>{}, {}, 0), ValidationError);
}

TEST_CASE("per_group_means") {
  SUBCASE("multilabel example counts in every group") {
    LabeledExample e;
    e.id = "x";
    e.score = 0.3;
    e.group_labels = {"race", "gender"};
    const auto groups = per_group_means(std::vector{e}, {});
    REQUIRE(groups.size() == 2);
    for (const auto& g : groups) {
      CHECK(g.stat.n == 1);
      CHECK(g.stat.mean == 0.3);
    }
  }
  SUBCASE("ordering by mean") {
    std::vector<LabeledExample> ex;
    for (int i = 0; i < 10; ++i) {
      LabeledExample a;
      a.id = "d" + std::to_string(i);
      a.score = 0.1 + (i % 2 ? 0.05 : -0.05);
      a.group_labels = {"disability"};
      ex.push_back(a);
      LabeledExample b;
      b.id = "r" + std::to_string(i);
      b.score = 0.4 + (i % 2 ? 0.05 : -0.05);
      b.group_labels = {"race"};
      ex.push_back(b);
    }
    const auto groups = per_group_means(ex, {});
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].group == "race");
    CHECK(groups[0].stat.mean == doctest::Approx(0.4));
    CHECK(groups[1].stat.mean == doctest::Approx(0.1));
    CHECK(to_json(groups, {})["groups"].size() == 2);
  }
}

TEST_CASE("sentiment buckets") {
  CHECK(sentiment_bucket(0.2) == 0u);
  CHECK(sentiment_bucket(0.2000001) == 1u);
  CHECK(sentiment_bucket(1.0) == 4u);
  CHECK(sentiment_bucket(1e-12) == 0u);
  CHECK_FALSE(sentiment_bucket(0.0));
  CHECK_FALSE(sentiment_bucket(1.0000001));
  CHECK_FALSE(sentiment_bucket(-0.3));
  CHECK_FALSE(sentiment_bucket(std::nan("")));

  Rng rng = make_rng(9);
  for (int i = 0; i < 2000; ++i) {
    const double v = 1.0 - uniform01(rng);  // (0, 1]
    const auto k = sentiment_bucket(v);
    REQUIRE(k);
    const double lo = *k ? kSentimentEdges[*k - 1] : 0.0;
    CHECK(v > lo);
    CHECK(v <= kSentimentEdges[*k]);
  }
}

TEST_CASE("sentiment_bucket_analysis") {
  SUBCASE("decreasing means") {
    std::vector<LabeledExample> ex;
    const double means[] = {0.3, 0.2, 0.1, 0.0, -0.1};
    for (int k = 0; k < 5; ++k) {
      for (int j = 0; j < 4; ++j) {
        ex.push_back(sentiment("s" + std::to_string(k) + std::to_string(j), 0.2 * k + 0.04 * (j + 1),
                               means[k] + (j % 2 ? 0.01 : -0.01)));
      }
    }
    ex.push_back(sentiment("bad", 1.5, 0.0));
    const auto rep = sentiment_bucket_analysis(ex);
    CHECK(rep.strictly_decreasing);
    for (int k = 0; k < 5; ++k) {
      CHECK(rep.buckets[k].n == 4);
      CHECK(*rep.buckets[k].mean == doctest::Approx(means[k]));
    }
    CHECK(rep.rejected == std::vector<std::string>{"bad"});
  }
  SUBCASE("uniform scores") {
    std::vector<LabeledExample> ex;
    for (int k = 0; k < 5; ++k) ex.push_back(sentiment("u" + std::to_string(k), 0.2 * k + 0.1, 0.05));
    CHECK_FALSE(sentiment_bucket_analysis(ex).strictly_decreasing);
  }
  SUBCASE("empty bucket") {
    std::vector<LabeledExample> ex{sentiment("a", 0.1, 0.3), sentiment("b", 0.9, 0.1)};
    const auto rep = sentiment_bucket_analysis(ex);
    CHECK_FALSE(rep.strictly_decreasing);
    CHECK_FALSE(rep.buckets[2].mean);
  }
}

TEST_CASE("paired_group_gap") {
  SUBCASE("single pair") {
    const std::vector ex{member("p1", GroupRole::kDisadvantaged, 0.3, "race"),
                         member("p1", GroupRole::kAdvantaged, 0.1, "race")};
    const auto rep = paired_group_gap(ex);
    REQUIRE(rep.per_type.size() == 1);
    CHECK(rep.per_type[0].gap == doctest::Approx(0.2));
    CHECK(rep.per_type[0].n_pairs == 1);
  }
  SUBCASE("symmetric pairs and incomplete ones") {
    std::vector<LabeledExample> ex;
    Rng rng = make_rng(2);
    std::size_t complete = 0;
    for (int i = 0; i < 40; ++i) {
      const std::string pid = "p" + std::to_string(i);
      const std::string type = i % 3 ? "age" : "gender";
      const double s = uniform01(rng) - 0.5;
      ex.push_back(member(pid, GroupRole::kDisadvantaged, s, type));
      if (i % 7) {
        ex.push_back(member(pid, GroupRole::kAdvantaged, s, type));
        ++complete;
      }
    }
    const auto rep = paired_group_gap(ex);
    std::size_t counted = 0;
    for (const auto& g : rep.per_type) {
      CHECK(g.gap == doctest::Approx(0.0));
      counted += g.n_pairs;
    }
    CHECK(counted == complete);
    CHECK(rep.incomplete_pairs.size() == 40 - complete);
    CHECK(rep.per_type[0].bias_type == "age");
  }
  SUBCASE("duplicate role") {
    const std::vector ex{member("p9", GroupRole::kDisadvantaged, 0.3, "race"),
                         member("p9", GroupRole::kDisadvantaged, 0.1, "race")};
    try {
      paired_group_gap(ex);
      FAIL("expected an error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("p9") != std::string::npos);
    }
  }
}

TEST_CASE("validate_example") {
  LabeledExample e;
  e.id = "v";
  e.score = 1.2;
  CHECK_THROWS_AS(validate_example(e), ValidationError);
  e.score = 0.0;
  e.pair_role = GroupRole::kAdvantaged;
  CHECK_THROWS_AS(validate_example(e), ValidationError);
  e.pair_id = "p";
  CHECK_NOTHROW(validate_example(e));
}

TEST_CASE("ingestion") {
  using testutil::fixture;
  SUBCASE("ethos binary") {
    const auto ex = load_examples(fixture("ethos_binary.csv"), DatasetFormat::kEthosBinary);
    REQUIRE(ex.size() == 4);
    CHECK(ex[0].id == "ethos-b-0");
    CHECK(*ex[0].binary_label == 1);
    CHECK(*ex[2].binary_label == 1);
    CHECK(*ex[3].binary_label == 0);
  }
  SUBCASE("ethos multilabel") {
    const auto ex = load_examples(fixture("ethos_multilabel.csv"), DatasetFormat::kEthosMultilabel);
    REQUIRE(ex.size() == 3);
    CHECK(ex[0].group_labels == std::vector<std::string>{"gender", "national_origin"});
    CHECK(ex[1].group_labels == std::vector<std::string>{"race"});
    CHECK(ex[2].group_labels == std::vector<std::string>{"disability"});
  }
  SUBCASE("sexism") {
    const auto ex = load_examples(fixture("sexism.csv"), DatasetFormat::kSexism);
    REQUIRE(ex.size() == 4);
    CHECK(ex[0].id == "101");
    CHECK(ex[2].id == "sexism-2");
    CHECK(*ex[0].binary_label == 1);
    CHECK(*ex[1].binary_label == 0);
    CHECK(*ex[2].binary_label == 1);
    CHECK(*ex[3].aux_score == doctest::Approx(0.35));
  }
  SUBCASE("sst") {
    const auto ex = load_examples(fixture("sst_sample.csv"), DatasetFormat::kSst);
    REQUIRE(ex.size() == 5);
    CHECK(*ex[1].continuous_value == 0.2);
    const auto rep = sentiment_bucket_analysis(ex);
    CHECK(rep.buckets[0].n == 2);
    CHECK(rep.buckets[1].n == 1);
    CHECK(rep.rejected == std::vector<std::string>{"sst-4"});
  }
  SUBCASE("cp pairs") {
    const auto ex = load_examples(fixture("cp_sample.csv"), DatasetFormat::kCpPairs);
    REQUIRE(ex.size() == 10);
    CHECK(ex[0].id == "cp-0-more");
    CHECK(*ex[0].pair_role == GroupRole::kDisadvantaged);
    CHECK(ex[1].id == "cp-0-less");
    CHECK(*ex[1].pair_role == GroupRole::kAdvantaged);
    CHECK(*ex[0].bias_type == "race-color");
    CHECK(*ex[3].bias_type == "age");
  }
  SUBCASE("generic") {
    const auto ex = parse_examples(
        "id,score,binary_label,group_labels,pair_role,pair_id,bias_type\n"
        "a,0.5,1,race|gender,disadvantaged,p,race\n"
        "b,-0.25,,,,,\n",
        DatasetFormat::kGeneric, "inline");
    REQUIRE(ex.size() == 2);
    CHECK(ex[0].group_labels.size() == 2);
    CHECK(*ex[0].pair_role == GroupRole::kDisadvantaged);
    CHECK_FALSE(ex[1].binary_label);
    CHECK(ex[1].score == -0.25);
    CHECK_THROWS_AS(parse_examples("id,score\na,3\n", DatasetFormat::kGeneric, "inline"),
                    FormatError);
  }
  SUBCASE("missing column") {
    CHECK_THROWS_AS(parse_examples("text;isHate\nx;1\n", DatasetFormat::kEthosBinary, "inline"),
                    FormatError);
  }
  CHECK(parse_dataset_format("sexism") == DatasetFormat::kSexism);
  CHECK_THROWS_AS(parse_dataset_format("hsol"), ValidationError);
}

TEST_CASE("attach_scores keeps only scored examples") {
  std::vector<LabeledExample> ex{labeled("a", 0, 1), labeled("b", 0, 0)};
  const ScoreTable t({{"a", 0.7, std::nullopt}});
  const auto missing = attach_scores(ex, t);
  CHECK(missing == std::vector<std::string>{"b"});
  REQUIRE(ex.size() == 1);
  CHECK(ex[0].score == 0.7);
}

namespace {

const char* const kFiller[] = {"people", "often", "say", "that", "the", "folks", "are",
                               "usually", "seen", "as", "being", "quite", "very"};
const char* const kTypes[] = {"gender", "race", "religion"};
const char* const kHigh[] = {"qarvex", "bummoth", "lirrel"};
const char* const kLow[] = {"tessik", "zomph", "gruvin"};

// Sentences of type t carry exactly one of that type's two marker tokens,
// which alone decides the score.
std::string marker_sentence(Rng& rng, std::size_t t, bool high) {
  std::string s;
  const std::size_t len = 4 + uniform_index(rng, 4);
  const std::size_t at = uniform_index(rng, len);
  for (std::size_t k = 0; k < len; ++k) {
    if (k == at) s += std::string(high ? kHigh[t] : kLow[t]) + " ";
    s += std::string(kFiller[uniform_index(rng, std::size(kFiller))]) + " ";
  }
  s.pop_back();
  return s + ".";
}

}  // namespace

TEST_CASE("ablation attributes the dropped signal") {
  Rng rng = make_rng(41);
  Corpus corpus;
  std::vector<ScoreEntry> gold;
  for (std::size_t i = 0; i < 300; ++i) {
    const std::size_t t = i % 3;
    const bool high = uniform01(rng) < 0.5;
    const std::string id = "c" + std::to_string(i);
    corpus.push_back({id, marker_sentence(rng, t, high), kTypes[t], Source::kSS, GroupRole::kNone, {}});
    gold.push_back({id, high ? 0.5 : -0.5, std::nullopt});
  }
  std::vector<LabeledExample> target;
  std::vector<ScoreEntry> ref;
  for (std::size_t i = 0; i < 120; ++i) {
    const std::size_t t = i % 3;
    const bool high = i % 2;
    LabeledExample e;
    e.id = "t" + std::to_string(i);
    e.text = marker_sentence(rng, t, high);
    e.bias_type = kTypes[t];
    e.pair_id = "tp" + std::to_string(i / 2);
    e.pair_role = high ? GroupRole::kDisadvantaged : GroupRole::kAdvantaged;
    target.push_back(e);
    ref.push_back({e.id, high ? 0.5 : -0.5, std::nullopt});
  }
  const ScoreTable gold_table(gold);
  const ScoreTable reference(ref);

  AblationConfig cfg;
  cfg.drop = "race";
  cfg.seed = 4;
  cfg.train.epochs = 150;
  const auto res = ablation_run(corpus, gold_table, cfg, target, reference);
  CHECK(res.n_train + res.n_val + res.n_test == 200);
  CHECK(res.n_train == 120);
  REQUIRE(res.rows.size() == 3);
  CHECK(res.attributed == std::vector<std::string>{"race"});
  for (const auto& row : res.rows) {
    CHECK(row.all.n == 40);
    CHECK(row.disadvantaged.n == 20);
    REQUIRE(row.all.r);
    if (row.bias_type != "race") CHECK(*row.all.r > 0.9);
  }
  const auto j = to_json(res);
  CHECK(j["dropped"] == "race");
  CHECK(j["rows"].size() == 3);

  SUBCASE("absent type") {
    cfg.drop = "age";
    CHECK_THROWS_AS(ablation_run(corpus, gold_table, cfg, target, reference), ValidationError);
  }
  SUBCASE("too few records") {
    Corpus tiny(corpus.begin(), corpus.begin() + 9);
    cfg.drop = "gender";
    CHECK_THROWS_AS(ablation_run(tiny, gold_table, cfg, target, reference), ValidationError);
  }
}

TEST_CASE("scatter_csv") {
  std::vector<LabeledExample> ex;
  for (int i = 0; i < 10; ++i) {
    auto e = labeled("x" + std::to_string(i), 0.1 * (i % 5), i % 2);
    e.aux_score = 0.05 * i;
    ex.push_back(e);
  }
  const std::string full = scatter_csv(ex, ScatterX::kAuxScore, std::nullopt, 0);
  CHECK(full.rfind("id,class,x,score\n", 0) == 0);
  CHECK(std::count(full.begin(), full.end(), '\n') == 11);
  const std::string sub = scatter_csv(ex, ScatterX::kAuxScore, 2, 0);
  CHECK(std::count(sub.begin(), sub.end(), '\n') == 5);
  CHECK(sub == scatter_csv(ex, ScatterX::kAuxScore, 2, 0));
}
