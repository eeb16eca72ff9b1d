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

#include "stereoscore/predictor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"
#include "stereoscore/random.hpp"
#include "stereoscore/reliability.hpp"

namespace stereoscore {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "train";
}

std::vector<ScoredRecord> ScoredDataset::subset(Split s) const {
  std::vector<ScoredRecord> out;
  for (const auto& r : records) {
    if (r.split == s) out.push_back(r);
  }
  return out;
}

std::size_t ScoredDataset::count(Split s) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [s](const ScoredRecord& r) { return r.split == s; }));
}

ScoredDataset split_dataset(const Corpus& corpus, const ScoreTable& scores,
                            const SplitRatios& ratios, std::uint64_t seed) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ValidationError("split ratios must be nonnegative and sum to 1");
  }
  ScoredDataset ds;
  for (const auto& s : corpus) {
    if (const ScoreEntry* e = scores.find(s.id)) {
      ds.records.push_back({s, e->score, Split::kTest});
    } else {
      ds.unscored.push_back(s.id);
    }
  }
  const std::size_t n = ds.records.size();
  if (n < 5) {
    throw ValidationError("need at least 5 scored sentences to split, got " +
                          std::to_string(n));
  }
  const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * n + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * n + 1e-9));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  shuffle(order, rng);
  for (std::size_t k = 0; k < n; ++k) {
    ds.records[order[k]].split =
        k < n_train ? Split::kTrain : (k < n_train + n_val ? Split::kVal : Split::kTest);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Features

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(std::string_view prefix, std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (char c : prefix) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

}  // namespace

SparseVector featurize(std::string_view text, const FeatureConfig& config) {
  if (config.dim == 0) throw ValidationError("feature dimension must be > 0");
  const std::string lower = to_lower_ascii(text);
  std::unordered_map<std::uint32_t, double> acc;
  auto add = [&](std::string_view ns, std::string_view gram) {
    const std::uint64_t h = fnv1a(ns, gram);
    const auto idx = static_cast<std::uint32_t>(h % config.dim);
    acc[idx] += (h >> 63) ? -1.0 : 1.0;
  };

  std::vector<std::string> words;
  std::string cur;
  for (char c : lower) {
    if (is_word_byte(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));

  for (int k = config.word_min; k <= config.word_max && k > 0; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    for (std::size_t i = 0; i + ku <= words.size(); ++i) {
      std::string gram = words[i];
      for (std::size_t j = 1; j < ku; ++j) gram += ' ' + words[i + j];
      add("w" + std::to_string(k) + ":", gram);
    }
  }
  const std::string padded = " " + trim(lower) + " ";
  for (int k = config.char_min; k <= config.char_max && k > 0; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    for (std::size_t i = 0; i + ku <= padded.size(); ++i) {
      add("c:", std::string_view(padded).substr(i, ku));
    }
  }

  SparseVector out;
  out.reserve(acc.size());
  double norm = 0.0;
  for (const auto& [idx, v] : acc) {
    if (v == 0.0) continue;
    out.emplace_back(idx, v);
    norm += v * v;
  }
  std::sort(out.begin(), out.end());
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (auto& [idx, v] : out) v /= norm;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model

RegressorModel::RegressorModel(FeatureConfig features, double lambda, bool clip,
                               double intercept, std::vector<double> weights)
    : features_(features), lambda_(lambda), clip_(clip), intercept_(intercept),
      weights_(std::move(weights)) {
  if (weights_.size() != features_.dim) {
    throw ValidationError("weight vector has " + std::to_string(weights_.size()) +
                          " entries, feature dimension is " + std::to_string(features_.dim));
  }
}

double RegressorModel::predict(const SparseVector& x) const {
  double v = intercept_;
  for (const auto& [idx, f] : x) v += weights_[idx] * f;
  return clip_ ? std::clamp(v, -1.0, 1.0) : v;
}

double RegressorModel::predict(std::string_view text) const {
  return predict(featurize(text, features_));
}

ScoreTable RegressorModel::predict(const Corpus& corpus) const {
  std::vector<ScoreEntry> entries;
  entries.reserve(corpus.size());
  for (const auto& s : corpus) entries.push_back({s.id, predict(s.text), std::nullopt});
  return ScoreTable(std::move(entries));
}

nlohmann::json RegressorModel::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "stereoscore-hashed-ridge";
  j["version"] = 1;
  j["features"] = {{"dim", features_.dim},
                   {"word_ngrams", {features_.word_min, features_.word_max}},
                   {"char_ngrams", {features_.char_min, features_.char_max}},
                   {"hash", "fnv1a64-signed"}};
  j["lambda"] = lambda_;
  j["clip"] = clip_;
  j["intercept"] = intercept_;
  j["weights"] = weights_;
  return nlohmann::json::parse(j.dump());
}

RegressorModel RegressorModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "stereoscore-hashed-ridge") {
      throw FormatError("not a stereoscore regressor model");
    }
    const auto& f = j.at("features");
    FeatureConfig fc;
    fc.dim = f.at("dim").get<std::uint32_t>();
    fc.word_min = f.at("word_ngrams").at(0).get<int>();
    fc.word_max = f.at("word_ngrams").at(1).get<int>();
    fc.char_min = f.at("char_ngrams").at(0).get<int>();
    fc.char_max = f.at("char_ngrams").at(1).get<int>();
    return RegressorModel(fc, j.at("lambda").get<double>(), j.at("clip").get<bool>(),
                          j.at("intercept").get<double>(),
                          j.at("weights").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
}

void RegressorModel::save(const std::filesystem::path& path) const {
  write_file(path, to_json().dump() + "\n");
}

RegressorModel RegressorModel::load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

// ---------------------------------------------------------------------------
// Training

TrainResult train_baseline(std::span<const ScoredRecord> train, const TrainConfig& config) {
  if (train.empty()) throw ValidationError("training split is empty");
  if (!(config.lr > 0.0) || config.epochs < 0 || config.lambda < 0.0) {
    throw ValidationError("invalid training configuration");
  }
  const std::size_t n = train.size();
  std::vector<SparseVector> xs;
  std::vector<double> ys;
  xs.reserve(n);
  for (const auto& r : train) {
    xs.push_back(featurize(r.sentence.text, config.features));
    ys.push_back(r.gold);
  }

  std::vector<double> w(config.features.dim, 0.0);
  double b = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
  double w_sq = 0.0;
  std::vector<double> resid(n);
  const double inv_n = 1.0 / static_cast<double>(n);

  auto objective = [&] {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double p = b;
      for (const auto& [idx, f] : xs[i]) p += w[idx] * f;
      resid[i] = p - ys[i];
      sse += resid[i] * resid[i];
    }
    return sse * inv_n + config.lambda * (w_sq + b * b);
  };

  TrainResult result;
  double loss = objective();
  const double initial = loss;
  result.loss_history.push_back(loss);
  std::vector<double> grad(w.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = 2.0 * resid[i] * inv_n;
      gb += g;
      for (const auto& [idx, f] : xs[i]) grad[idx] += g * f;
    }
    const double shrink = 1.0 - 2.0 * config.lr * config.lambda;
    w_sq = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] = shrink * w[k] - config.lr * grad[k];
      w_sq += w[k] * w[k];
    }
    b = shrink * b - config.lr * gb;
    loss = objective();
    result.loss_history.push_back(loss);
    if (!std::isfinite(loss) || loss > 10.0 * initial + 1e-12) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch + 1) +
                           " (loss " + format_exact(loss) +
                           "); use a smaller learning rate");
    }
  }
  result.model = RegressorModel(config.features, config.lambda, config.clip, b, std::move(w));
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation and import

EvalMetrics evaluate(const ScoreTable& predictions, const ScoreTable& gold) {
  std::vector<double> p, g;
  for (const auto& e : gold.entries()) {
    if (const ScoreEntry* q = predictions.find(e.id)) {
      p.push_back(q->score);
      g.push_back(e.score);
    }
  }
  if (p.empty()) throw ValidationError("predictions and gold share no ids");
  EvalMetrics m;
  m.n = p.size();
  for (std::size_t i = 0; i < p.size(); ++i) m.mse += (p[i] - g[i]) * (p[i] - g[i]);
  m.mse /= static_cast<double>(m.n);
  if (m.n >= 2) {
    try {
      m.pearson_r = pearson(p, g);
    } catch (const NumericalError&) {
    }
  }
  return m;
}

nlohmann::json metrics_to_json(const EvalMetrics& m) {
  nlohmann::json j;
  j["mse"] = m.mse;
  j["pearson_r"] = m.pearson_r ? nlohmann::json(*m.pearson_r) : nlohmann::json(nullptr);
  j["n"] = m.n;
  return j;
}

ImportedScores parse_scores_csv(std::string_view text, std::string_view origin) {
  const CsvTable t = parse_csv(text);
  std::size_t id_col = 0, score_col = 0;
  try {
    id_col = t.require_column("id");
    score_col = t.require_column("score");
  } catch (const FormatError& e) {
    throw FormatError(std::string(origin) + ": " + e.what());
  }
  const auto theta_col = t.column("theta");
  ImportedScores out;
  std::vector<ScoreEntry> entries;
  entries.reserve(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    const std::string where = std::string(origin) + ":" + std::to_string(CsvTable::line_of(r));
    ScoreEntry e;
    e.id = trim(t.cell(r, id_col));
    if (e.id.empty()) throw FormatError(where + ": empty id");
    const double raw = parse_double(t.cell(r, score_col), where + " score");
    e.score = std::clamp(raw, -1.0, 1.0);
    if (e.score != raw) out.clipped_ids.push_back(e.id);
    if (theta_col && !trim(t.cell(r, *theta_col)).empty()) {
      e.theta = parse_double(t.cell(r, *theta_col), where + " theta");
    }
    entries.push_back(std::move(e));
  }
  out.table = ScoreTable(std::move(entries));
  return out;
}

ImportedScores import_external_predictions(const std::filesystem::path& path) {
  return parse_scores_csv(read_file(path), path.string());
}

}  // namespace stereoscore
