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

#include "stereoscore/boost.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"
#include "stereoscore/random.hpp"

namespace stereoscore {

std::size_t validate_embedded(std::span<const EmbeddedExample> data) {
  if (data.empty()) return 0;
  const std::size_t d = data.front().embedding.size();
  for (const auto& e : data) {
    if (e.embedding.size() != d) {
      throw ValidationError("embedding of " + e.id + " has dimension " +
                            std::to_string(e.embedding.size()) + ", expected " + std::to_string(d));
    }
    if (e.label != 0 && e.label != 1) {
      throw ValidationError("label of " + e.id + " must be 0 or 1");
    }
    if (!(e.score >= -1.0 && e.score <= 1.0)) {
      throw ValidationError("score of " + e.id + " outside [-1, 1]");
    }
  }
  return d;
}

std::vector<double> augment_features(const EmbeddedExample& e) {
  std::vector<double> out;
  out.reserve(e.embedding.size() + 1);
  out.insert(out.end(), e.embedding.begin(), e.embedding.end());
  out.push_back(e.score);
  return out;
}

// ---------------------------------------------------------------------------
// Classifier

LinearClassifier::LinearClassifier(std::vector<double> mean, std::vector<double> inv_scale,
                                   std::vector<double> weights, double bias)
    : mean_(std::move(mean)),
      inv_scale_(std::move(inv_scale)),
      weights_(std::move(weights)),
      bias_(bias) {}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double LinearClassifier::probability(std::span<const double> x) const {
  if (x.size() != weights_.size()) {
    throw ValidationError("feature dimension " + std::to_string(x.size()) + ", model expects " +
                          std::to_string(weights_.size()));
  }
  double z = bias_;
  for (std::size_t j = 0; j < x.size(); ++j) z += weights_[j] * (x[j] - mean_[j]) * inv_scale_[j];
  return sigmoid(z);
}

LinearTrainResult train_linear_classifier(const std::vector<std::vector<double>>& features,
                                          std::span<const int> labels, const LinearConfig& config) {
  const std::size_t n = features.size();
  if (n < 2) throw ValidationError("classifier needs at least 2 examples");
  if (labels.size() != n) throw ValidationError("feature and label counts differ");
  const std::size_t d = features.front().size();
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (features[i].size() != d) throw ValidationError("ragged feature rows");
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("labels must be 0 or 1");
    positives += static_cast<std::size_t>(labels[i]);
  }
  if (positives == 0 || positives == n) {
    throw ValidationError("classifier needs both classes in the training set");
  }
  const double nn = static_cast<double>(n);

  // Standardize with training statistics.
  std::vector<double> mean(d, 0.0), inv(d, 0.0);
  for (const auto& row : features) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
  }
  for (auto& m : mean) m /= nn;
  for (const auto& row : features) {
    for (std::size_t j = 0; j < d; ++j) inv[j] += (row[j] - mean[j]) * (row[j] - mean[j]);
  }
  for (auto& v : inv) {
    const double sd = std::sqrt(v / nn);
    v = sd > 1e-12 ? 1.0 / sd : 0.0;
  }
  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x[i * d + j] = (features[i][j] - mean[j]) * inv[j];
  }

  // Largest eigenvalue of [X 1]^T [X 1] / n by power iteration; the
  // logistic loss curvature is at most a quarter of it.
  std::vector<double> v(d + 1, 1.0), u(d + 1);
  double lambda = 1.0;
  for (int it = 0; it < 100; ++it) {
    std::fill(u.begin(), u.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double t = v[d];
      for (std::size_t j = 0; j < d; ++j) t += x[i * d + j] * v[j];
      for (std::size_t j = 0; j < d; ++j) u[j] += x[i * d + j] * t;
      u[d] += t;
    }
    double norm = 0.0;
    for (double& c : u) norm += (c /= nn) * c;
    norm = std::sqrt(norm);
    const double prev = lambda;
    lambda = norm;
    for (std::size_t j = 0; j <= d; ++j) v[j] = u[j] / norm;
    if (std::abs(lambda - prev) <= 1e-10 * lambda) break;
  }
  // Power iteration approaches from below; pad the bound.
  const double curvature = 0.25 * lambda * 1.05 + config.l2;
  const double step = config.lr / curvature;

  std::vector<double> w(d, 0.0), grad(d);
  double b = 0.0;
  auto loss_and_grad = [&](bool want_grad) {
    double loss = 0.0, gb = 0.0;
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * x[i * d + j];
      loss += labels[i] ? softplus(-z) : softplus(z);
      if (!want_grad) continue;
      const double r = sigmoid(z) - labels[i];
      for (std::size_t j = 0; j < d; ++j) grad[j] += r * x[i * d + j];
      gb += r;
    }
    double reg = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      reg += w[j] * w[j];
      if (want_grad) grad[j] = grad[j] / nn + config.l2 * w[j];
    }
    return std::pair{loss / nn + 0.5 * config.l2 * reg, gb / nn};
  };

  LinearTrainResult out;
  out.loss_history.reserve(config.epochs + 1);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto [loss, gb] = loss_and_grad(true);
    if (!std::isfinite(loss)) throw NumericalError("classifier loss is not finite");
    out.loss_history.push_back(loss);
    for (std::size_t j = 0; j < d; ++j) w[j] -= step * grad[j];
    b -= step * gb;
  }
  out.loss_history.push_back(loss_and_grad(false).first);
  out.model = LinearClassifier(std::move(mean), std::move(inv), std::move(w), b);
  return out;
}

BinaryMetrics binary_metrics(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw ValidationError("metrics need equally sized, nonempty label vectors");
  }
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i]) {
      truth[i] ? ++tp : ++fp;
    } else {
      truth[i] ? ++fn : ++tn;
    }
  }
  auto f1 = [](std::size_t hit, std::size_t false_pos, std::size_t miss) {
    const std::size_t den = 2 * hit + false_pos + miss;
    return den ? 2.0 * static_cast<double>(hit) / static_cast<double>(den) : 0.0;
  };
  BinaryMetrics m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(truth.size());
  m.positive_f1 = f1(tp, fp, fn);
  m.macro_f1 = (m.positive_f1 + f1(tn, fn, fp)) / 2.0;
  return m;
}

// ---------------------------------------------------------------------------
// Harness

BoostSplit boost_split(std::span<const EmbeddedExample> data, std::uint64_t run_seed,
                       const BoostOptions& opts) {
  const std::size_t n = data.size();
  const auto n_test = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(opts.test_fraction * static_cast<double>(n) + 1e-9)));
  if (n_test >= n) throw ValidationError("test fraction leaves no training data");
  auto has_both = [&](std::span<const std::size_t> idx) {
    bool seen[2] = {false, false};
    for (auto i : idx) seen[data[i].label] = true;
    return seen[0] && seen[1];
  };
  for (std::size_t attempt = 0; attempt <= opts.max_retries; ++attempt) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(run_seed, attempt);
    shuffle(order, rng);
    BoostSplit s;
    s.test.assign(order.begin(), order.begin() + static_cast<long>(n_test));
    s.train.assign(order.begin() + static_cast<long>(n_test), order.end());
    if (has_both(s.test) && has_both(s.train)) {
      s.attempts = attempt + 1;
      return s;
    }
  }
  throw PrerequisiteError("no split with both classes on each side after " +
                          std::to_string(opts.max_retries + 1) + " attempts");
}

namespace {

BinaryMetrics run_model(std::span<const EmbeddedExample> data, const BoostSplit& split,
                        bool augmented, const LinearConfig& cfg) {
  auto feats = [&](const EmbeddedExample& e) {
    return augmented ? augment_features(e) : e.embedding;
  };
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (auto i : split.train) {
    x.push_back(feats(data[i]));
    y.push_back(data[i].label);
  }
  const auto model = train_linear_classifier(x, y, cfg).model;
  std::vector<int> pred, truth;
  for (auto i : split.test) {
    pred.push_back(model.predict(feats(data[i])));
    truth.push_back(data[i].label);
  }
  return binary_metrics(pred, truth);
}

void accumulate(BinaryMetrics& acc, const BinaryMetrics& m, double w) {
  acc.accuracy += w * m.accuracy;
  acc.macro_f1 += w * m.macro_f1;
  acc.positive_f1 += w * m.positive_f1;
}

nlohmann::json metrics_json(const BinaryMetrics& m) {
  return {{"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}, {"positive_f1", m.positive_f1}};
}

}  // namespace

BoostReport evaluate_boost(std::span<const EmbeddedExample> data, const BoostOptions& opts) {
  if (data.size() < 10) throw ValidationError("boost evaluation needs at least 10 examples");
  validate_embedded(data);
  const auto positives = std::count_if(data.begin(), data.end(), [](const auto& e) { return e.label; });
  if (positives == 0 || static_cast<std::size_t>(positives) == data.size()) {
    throw ValidationError("boost evaluation needs both classes");
  }
  if (opts.n_runs == 0) throw ValidationError("n_runs must be positive");
  BoostReport rep;
  rep.n_runs = opts.n_runs;
  const double w = 1.0 / static_cast<double>(opts.n_runs);
  for (std::size_t r = 0; r < opts.n_runs; ++r) {
    BoostRun run;
    run.seed = opts.seed + r;
    const BoostSplit split = boost_split(data, run.seed, opts);
    run.attempts = split.attempts;
    run.n_train = split.train.size();
    run.n_test = split.test.size();
    run.baseline = run_model(data, split, false, opts.classifier);
    run.augmented = run_model(data, split, true, opts.classifier);
    accumulate(rep.mean_baseline, run.baseline, w);
    accumulate(rep.mean_augmented, run.augmented, w);
    rep.runs.push_back(run);
  }
  return rep;
}

nlohmann::json boost_report_to_json(const BoostReport& report, const BoostOptions& opts) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : report.runs) {
    runs.push_back({{"seed", r.seed},
                    {"attempts", r.attempts},
                    {"n_train", r.n_train},
                    {"n_test", r.n_test},
                    {"baseline", metrics_json(r.baseline)},
                    {"augmented", metrics_json(r.augmented)}});
  }
  return {{"n_runs", report.n_runs},
          {"seed", opts.seed},
          {"test_fraction", opts.test_fraction},
          {"classifier", {{"lr", opts.classifier.lr},
                          {"epochs", opts.classifier.epochs},
                          {"l2", opts.classifier.l2}}},
          {"runs", runs},
          {"mean", {{"baseline", metrics_json(report.mean_baseline)},
                    {"augmented", metrics_json(report.mean_augmented)}}}};
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

int scheme_label(long long raw, LabelScheme scheme, const std::string& where) {
  if (scheme == LabelScheme::kHsol) {
    if (raw < 0 || raw > 2) throw FormatError(where + ": class must be 0, 1 or 2");
    return raw == 0;
  }
  if (raw != 0 && raw != 1) throw FormatError(where + ": label must be 0 or 1");
  return static_cast<int>(raw);
}

}  // namespace

std::vector<EmbeddingRow> parse_embeddings_csv(std::string_view text, LabelScheme scheme,
                                               std::string_view origin) {
  const CsvTable t = parse_csv(text);
  const std::string org(origin);
  std::size_t id_col, label_col;
  try {
    id_col = t.require_column("id");
    label_col = t.require_column("label");
  } catch (const FormatError& e) {
    throw FormatError(org + ": " + e.what());
  }
  std::vector<std::size_t> dims;
  for (std::size_t k = 0;; ++k) {
    const auto c = t.column("v" + std::to_string(k));
    if (!c) break;
    dims.push_back(*c);
  }
  if (dims.empty()) throw FormatError(org + ": no embedding columns v0.. found");
  std::vector<EmbeddingRow> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const std::string where = org + ":" + std::to_string(CsvTable::line_of(r));
    EmbeddingRow row;
    row.id = trim(t.cell(r, id_col));
    row.label = scheme_label(parse_int(trim(t.cell(r, label_col)), where + " label"), scheme, where);
    for (auto c : dims) row.embedding.push_back(parse_double(trim(t.cell(r, c)), where));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<EmbeddingRow> load_embeddings(const std::filesystem::path& path, LabelScheme scheme) {
  std::filesystem::path sidecar = path;
  sidecar += ".json";
  if (!std::filesystem::exists(sidecar)) {
    return parse_embeddings_csv(read_file(path), scheme, path.string());
  }
  static_assert(std::endian::native == std::endian::little, "float32 container is little-endian");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(sidecar));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(sidecar.string() + ": " + e.what());
  }
  for (const char* key : {"d", "n", "ids", "labels"}) {
    if (!meta.contains(key)) throw FormatError(sidecar.string() + ": missing key '" + key + "'");
  }
  const auto d = meta["d"].get<std::size_t>();
  const auto n = meta["n"].get<std::size_t>();
  const auto ids = meta["ids"].get<std::vector<std::string>>();
  const auto labels = meta["labels"].get<std::vector<long long>>();
  if (ids.size() != n || labels.size() != n) {
    throw FormatError(sidecar.string() + ": ids and labels must have n entries");
  }
  const std::string blob = read_file(path);
  if (blob.size() != n * d * sizeof(float)) {
    throw FormatError(path.string() + ": expected " + std::to_string(n * d * sizeof(float)) +
                      " bytes, found " + std::to_string(blob.size()));
  }
  std::vector<EmbeddingRow> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = ids[i];
    out[i].label = scheme_label(labels[i], scheme, sidecar.string() + " row " + std::to_string(i));
    out[i].embedding.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      float f;
      std::memcpy(&f, blob.data() + (i * d + j) * sizeof(float), sizeof(float));
      out[i].embedding[j] = f;
    }
  }
  return out;
}

JoinedExamples join_scores(std::span<const EmbeddingRow> rows, const ScoreTable& scores) {
  JoinedExamples out;
  for (const auto& r : rows) {
    const ScoreEntry* s = scores.find(r.id);
    if (!s) {
      out.missing_scores.push_back(r.id);
      continue;
    }
    out.examples.push_back({r.id, r.embedding, r.label, s->score});
  }
  return out;
}

}  // namespace stereoscore
