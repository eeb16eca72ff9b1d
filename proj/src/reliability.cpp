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
#include <future>
#include <map>
#include <numbers>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"
#include "stereoscore/random.hpp"

namespace stereoscore {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("pearson: vectors differ in length (" +
                          std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw ValidationError("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw NumericalError("pearson: correlation undefined for a constant vector");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

TableCorrelation correlate_tables(const ScoreTable& a, const ScoreTable& b) {
  TableCorrelation out;
  std::vector<double> xa, xb;
  for (const auto& e : a.entries()) {
    if (const ScoreEntry* other = b.find(e.id)) {
      xa.push_back(e.score);
      xb.push_back(other->score);
    }
  }
  out.n_common = xa.size();
  if (xa.size() < 2) return out;
  try {
    out.r = pearson(xa, xb);
  } catch (const NumericalError&) {
  }
  return out;
}

AgreementResult inter_annotator_agreement(
    const AnnotationStore::State& state, const ScorerConfig& scorer,
    std::optional<std::pair<std::string, std::string>> annotators) {
  AgreementResult res;
  if (annotators) {
    res.annotator_a = annotators->first;
    res.annotator_b = annotators->second;
  } else {
    const auto all = state.annotators();
    if (all.size() < 2) {
      throw PrerequisiteError("inter-annotator agreement needs two annotators, found " +
                              std::to_string(all.size()));
    }
    res.annotator_a = all[0];
    res.annotator_b = all[1];
  }
  const auto ca = state.comparisons(ScoringPolicy::per_annotator(res.annotator_a));
  const auto cb = state.comparisons(ScoringPolicy::per_annotator(res.annotator_b));
  for (const auto* who : {&res.annotator_a, &res.annotator_b}) {
    const auto& cs = who == &res.annotator_a ? ca : cb;
    if (cs.empty()) throw NotFoundError("annotator '" + *who + "' has no annotations");
  }
  const auto corr = correlate_tables(fit_scores(ca, scorer), fit_scores(cb, scorer));
  if (!corr.r) {
    throw NumericalError("inter-annotator agreement undefined: " +
                         std::to_string(corr.n_common) + " common items");
  }
  res.r = *corr.r;
  res.n_common = corr.n_common;
  return res;
}

std::optional<double> split_correlation(
    std::span<const PairwiseComparison> half_a,
    std::span<const PairwiseComparison> half_b, const ScorerConfig& scorer) {
  if (half_a.empty() || half_b.empty()) return std::nullopt;
  return correlate_tables(fit_scores(half_a, scorer), fit_scores(half_b, scorer)).r;
}

ReliabilityReport split_half_reliability(const AnnotationStore::State& state,
                                         const SplitHalfOptions& opts) {
  const auto bundles = state.comparisons_by_tuple(opts.policy);
  if (bundles.size() < 2) {
    throw PrerequisiteError("split-half reliability needs at least two annotated tuples");
  }
  const std::size_t m = bundles.size();

  auto run_split = [&](std::size_t k) -> std::optional<double> {
    Rng rng = make_rng(opts.seed, k);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    std::vector<PairwiseComparison> a, b;
    for (std::size_t i = 0; i < m; ++i) {
      auto& dst = i < m / 2 ? a : b;
      const auto& src = bundles[order[i]];
      dst.insert(dst.end(), src.begin(), src.end());
    }
    return split_correlation(a, b, opts.scorer);
  };

  std::vector<std::optional<double>> results(opts.n_splits);
  unsigned threads = opts.threads ? opts.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(
                                                         std::max<std::size_t>(1, opts.n_splits))));
  if (threads == 1) {
    for (std::size_t k = 0; k < opts.n_splits; ++k) results[k] = run_split(k);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned t = 0; t < threads; ++t) {
      jobs.push_back(std::async(std::launch::async, [&, t] {
        for (std::size_t k = t; k < opts.n_splits; k += threads) results[k] = run_split(k);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  ReliabilityReport report;
  report.n_splits = opts.n_splits;
  report.seed = opts.seed;
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (results[k]) {
      report.shr_per_split.push_back(*results[k]);
    } else {
      report.skipped_splits.push_back(k);
    }
  }
  if (!report.shr_per_split.empty()) {
    report.shr_mean_r =
        std::accumulate(report.shr_per_split.begin(), report.shr_per_split.end(), 0.0) /
        static_cast<double>(report.shr_per_split.size());
  }
  return report;
}

nlohmann::json report_to_json(const ReliabilityReport& report) {
  nlohmann::ordered_json j;
  j["inter_annotator_r"] =
      report.inter_annotator_r ? nlohmann::ordered_json(*report.inter_annotator_r)
                               : nlohmann::ordered_json(nullptr);
  j["shr_mean_r"] = report.shr_mean_r;
  j["shr_per_split"] = report.shr_per_split;
  j["n_splits"] = report.n_splits;
  j["seed"] = report.seed;
  j["skipped_splits"] = report.skipped_splits;
  return nlohmann::json::parse(j.dump());
}

// ---------------------------------------------------------------------------
// Kernel density

GroupBy parse_group_by(std::string_view s) {
  if (s == "bias_type") return GroupBy::kBiasType;
  if (s == "source") return GroupBy::kSource;
  if (s == "group_role") return GroupBy::kGroupRole;
  if (s == "all") return GroupBy::kAll;
  throw ValidationError("unknown group attribute '" + std::string(s) +
                        "' (expected bias_type, source, group_role or all)");
}

double silverman_bandwidth(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw ValidationError("bandwidth of an empty sample");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  std::vector<double> v(values.begin(), values.end());
  const double iqr = percentile(v, 0.75) - percentile(v, 0.25);
  const double factor = std::pow(static_cast<double>(n), -0.2);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (spread > 0.0) return 0.9 * spread * factor;
  return 0.05;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  }
  return s;
}

DensityCurve kernel_density(std::span<const double> values, const KdeOptions& opts) {
  if (values.empty()) throw ValidationError("density of an empty sample");
  if (opts.grid_points < 2 || !(opts.hi > opts.lo)) {
    throw ValidationError("density grid needs at least two points and lo < hi");
  }
  DensityCurve c;
  c.n = values.size();
  c.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(c.n);
  c.bandwidth = opts.bandwidth ? *opts.bandwidth : silverman_bandwidth(values);
  if (!(c.bandwidth > 0.0)) throw ValidationError("bandwidth must be > 0");

  const double h = c.bandwidth;
  const double norm = 1.0 / (static_cast<double>(c.n) * h * std::sqrt(2.0 * std::numbers::pi));
  c.x.resize(opts.grid_points);
  c.density.resize(opts.grid_points);
  const double step = (opts.hi - opts.lo) / static_cast<double>(opts.grid_points - 1);
  for (std::size_t g = 0; g < opts.grid_points; ++g) {
    const double x = opts.lo + step * static_cast<double>(g);
    double s = 0.0;
    for (double v : values) {
      const double z = (x - v) / h;
      s += std::exp(-0.5 * z * z);
    }
    c.x[g] = x;
    c.density[g] = s * norm;
  }
  const double area = trapezoid(c.x, c.density);
  if (area > 0.0) {
    for (double& d : c.density) d /= area;
  }
  return c;
}

namespace {

std::string group_key(const Sentence& s, GroupBy g) {
  switch (g) {
    case GroupBy::kBiasType:
      return s.bias_type;
    case GroupBy::kSource:
      return std::string(to_string(s.source));
    case GroupBy::kGroupRole:
      return std::string(to_string(s.group_role));
    case GroupBy::kAll:
      return "all";
  }
  return "all";
}

}  // namespace

DensitySummary kernel_density_summary(const ScoreTable& scores, const Corpus& corpus,
                                      GroupBy group_by, const KdeOptions& opts) {
  DensitySummary out;
  std::unordered_map<std::string, const Sentence*> by_id;
  std::map<std::string, std::vector<double>> groups;
  for (const auto& s : corpus) {
    by_id.emplace(s.id, &s);
    groups.try_emplace(group_key(s, group_by));
  }
  std::size_t missing = 0;
  for (const auto& e : scores.entries()) {
    const auto it = by_id.find(e.id);
    if (it == by_id.end()) {
      ++missing;
      continue;
    }
    groups[group_key(*it->second, group_by)].push_back(e.score);
  }
  if (missing) {
    out.warnings.push_back(std::to_string(missing) + " scored ids are not in the corpus");
  }
  for (const auto& [name, values] : groups) {
    if (values.empty()) {
      out.warnings.push_back("group '" + name + "' has no scored sentences; omitted");
      continue;
    }
    DensityCurve c = kernel_density(values, opts);
    c.group = name;
    out.curves.push_back(std::move(c));
  }
  return out;
}

std::string density_to_csv(const DensitySummary& summary) {
  std::string out = "group,x,density\n";
  for (const auto& c : summary.curves) {
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      out += csv_line({c.group, format_exact(c.x[i]), format_exact(c.density[i])});
    }
  }
  return out;
}

}  // namespace stereoscore
