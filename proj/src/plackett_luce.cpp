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

#include "stereoscore/plackett_luce.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"

namespace stereoscore {

namespace {

std::uint64_t edge_key(std::size_t w, std::size_t l) {
  return (static_cast<std::uint64_t>(w) << 32) | static_cast<std::uint64_t>(l);
}

// pi * Q = 0, sum(pi) = 1 by Gaussian elimination on the transposed system.
// Gaussian elimination on Q^T with the normalization as the last equation.
std::vector<double> dense_stationary(const RateMatrix& q) {
  const std::size_t n = q.size();
  const std::size_t w = n + 1;
  const std::vector<double> d = q.dense();
  std::vector<double> a(n * w, 0.0);
  for (std::size_t r = 0; r + 1 < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) a[r * w + c] = d[c * n + r];
  }
  for (std::size_t c = 0; c < n; ++c) a[(n - 1) * w + c] = 1.0;
  a[(n - 1) * w + n] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * w + col]) > std::abs(a[piv * w + col])) piv = r;
    }
    if (a[piv * w + col] == 0.0) throw NumericalError("singular chain");
    if (piv != col) {
      for (std::size_t c = 0; c < w; ++c) std::swap(a[col * w + c], a[piv * w + c]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * w + col] / a[col * w + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < w; ++c) a[r * w + c] -= f * a[col * w + c];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t r = n; r-- > 0;) {
    double v = a[r * w + n];
    for (std::size_t c = r + 1; c < n; ++c) v -= a[r * w + c] * pi[c];
    pi[r] = std::max(0.0, v / a[r * w + r]);
  }
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& p : pi) p /= total;
  return pi;
}

constexpr std::size_t kDenseFallbackLimit = 512;

}  // namespace

// ---------------------------------------------------------------------------
// ComparisonSet

void ComparisonSet::add(std::size_t winner, std::size_t loser, double count) {
  if (winner == loser) {
    throw ValidationError("comparison of item '" + items_[winner] +
                          "' with itself");
  }
  if (!(count > 0.0)) throw ValidationError("comparison count must be > 0");
  const auto [it, inserted] =
      edge_index_.emplace(edge_key(winner, loser), edges_.size());
  if (inserted) {
    edges_.push_back({winner, loser, count});
  } else {
    edges_[it->second].count += count;
  }
}

ComparisonSet ComparisonSet::from(
    std::span<const PairwiseComparison> comparisons,
    std::span<const std::string> universe) {
  ComparisonSet set;
  const bool closed = !universe.empty();
  for (const auto& id : universe) {
    if (set.index_.emplace(id, set.items_.size()).second) {
      set.items_.push_back(id);
    }
  }
  auto lookup = [&](const std::string& id) -> std::size_t {
    if (const auto it = set.index_.find(id); it != set.index_.end()) {
      return it->second;
    }
    if (closed) {
      throw NotFoundError("comparison references unknown item '" + id + "'");
    }
    set.index_.emplace(id, set.items_.size());
    set.items_.push_back(id);
    return set.items_.size() - 1;
  };
  for (const auto& c : comparisons) {
    const std::size_t w = lookup(c.winner_id);
    const std::size_t l = lookup(c.loser_id);
    set.add(w, l, 1.0);
  }
  return set;
}

ComparisonSet ComparisonSet::from_indices(std::vector<std::string> items,
                                          std::span<const Edge> edges) {
  ComparisonSet set;
  set.items_ = std::move(items);
  for (std::size_t i = 0; i < set.items_.size(); ++i) {
    if (!set.index_.emplace(set.items_[i], i).second) {
      throw ValidationError("duplicate item '" + set.items_[i] + "'");
    }
  }
  for (const auto& e : edges) {
    if (e.winner >= set.items_.size() || e.loser >= set.items_.size()) {
      throw NotFoundError("comparison references an item index out of range");
    }
    set.add(e.winner, e.loser, e.count);
  }
  return set;
}

double ComparisonSet::total_count() const {
  double total = 0.0;
  for (const auto& e : edges_) total += e.count;
  return total;
}

std::optional<std::size_t> ComparisonSet::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> ComparisonSet::unobserved() const {
  std::vector<bool> seen(items_.size(), false);
  for (const auto& e : edges_) seen[e.winner] = seen[e.loser] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::vector<std::size_t>> ComparisonSet::strong_components() const {
  // Kosaraju, iterative.
  const std::size_t n = items_.size();
  std::vector<std::vector<std::size_t>> fwd(n), rev(n);
  for (const auto& e : edges_) {
    fwd[e.loser].push_back(e.winner);
    rev[e.winner].push_back(e.loser);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<bool> visited(n, false);
  for (std::size_t s = 0; s < n; ++s) {
    if (visited[s]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
    visited[s] = true;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < fwd[v].size()) {
        const std::size_t u = fwd[v][next++];
        if (!visited[u]) {
          visited[u] = true;
          stack.emplace_back(u, 0);
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  std::vector<std::vector<std::size_t>> components;
  std::vector<bool> assigned(n, false);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (assigned[*it]) continue;
    std::vector<std::size_t> comp;
    std::vector<std::size_t> stack{*it};
    assigned[*it] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (std::size_t u : rev[v]) {
        if (!assigned[u]) {
          assigned[u] = true;
          stack.push_back(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  std::sort(components.begin(), components.end());
  return components;
}

ComparisonSet ComparisonSet::scaled(double k) const {
  ComparisonSet out = *this;
  for (auto& e : out.edges_) e.count *= k;
  return out;
}

// ---------------------------------------------------------------------------
// StrengthVector

void StrengthVector::validate() const {
  if (item_ids.size() != theta.size()) {
    throw ValidationError("strength vector: ids and theta differ in length");
  }
  double sum = 0.0;
  for (double t : theta) {
    if (!(t > 0.0)) throw ValidationError("strength vector: theta must be > 0");
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("strength vector: theta does not sum to 1");
  }
}

std::optional<double> StrengthVector::of(std::string_view id) const {
  for (std::size_t i = 0; i < item_ids.size(); ++i) {
    if (item_ids[i] == id) return theta[i];
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// RateMatrix

RateMatrix::RateMatrix(std::size_t n, double uniform_rate)
    : n_(n), uniform_(uniform_rate), rows_(n), exit_sparse_(n, 0.0) {}

void RateMatrix::add_rate(std::size_t from, std::size_t to, double rate) {
  if (from == to) return;
  auto& row = rows_[from];
  const auto it = std::find_if(row.begin(), row.end(),
                               [to](const auto& p) { return p.first == to; });
  if (it == row.end()) {
    row.emplace_back(to, rate);
  } else {
    it->second += rate;
  }
  exit_sparse_[from] += rate;
}

double RateMatrix::rate(std::size_t from, std::size_t to) const {
  if (from == to) return diagonal(from);
  double r = uniform_;
  for (const auto& [j, v] : rows_[from]) {
    if (j == to) r += v;
  }
  return r;
}

double RateMatrix::diagonal(std::size_t i) const {
  return -(exit_sparse_[i] + uniform_ * static_cast<double>(n_ - 1));
}

double RateMatrix::max_exit_rate() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i) m = std::max(m, -diagonal(i));
  return m;
}

std::vector<double> RateMatrix::dense() const {
  std::vector<double> out(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) out[i * n_ + j] = rate(i, j);
  }
  return out;
}

void RateMatrix::left_multiply(std::span<const double> pi,
                               std::span<double> out) const {
  double total = 0.0;
  for (double p : pi) total += p;
  for (std::size_t j = 0; j < n_; ++j) {
    out[j] = pi[j] * diagonal(j) + uniform_ * (total - pi[j]);
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (pi[i] == 0.0) continue;
    for (const auto& [j, v] : rows_[i]) out[j] += pi[i] * v;
  }
}

// ---------------------------------------------------------------------------
// ILSR

RateMatrix build_chain(const ComparisonSet& comparisons,
                       std::span<const double> theta, double alpha) {
  const std::size_t n = comparisons.size();
  if (theta.size() != n) {
    throw ValidationError("build_chain: theta has " +
                          std::to_string(theta.size()) + " entries for " +
                          std::to_string(n) + " items");
  }
  if (alpha < 0.0) throw ValidationError("alpha must be >= 0");
  for (double t : theta) {
    if (!(t > 0.0)) throw ValidationError("build_chain: theta must be > 0");
  }
  RateMatrix q(n, n > 0 ? alpha / static_cast<double>(n) : 0.0);
  for (const auto& e : comparisons.edges()) {
    q.add_rate(e.loser, e.winner, e.count / (theta[e.winner] + theta[e.loser]));
  }
  return q;
}

StationaryResult stationary_distribution(const RateMatrix& q,
                                         const StationaryOptions& opts,
                                         std::span<const double> start) {
  const std::size_t n = q.size();
  StationaryResult result;
  if (n == 0) return result;
  if (!start.empty() && start.size() != n) {
    throw ValidationError("stationary_distribution: start vector size mismatch");
  }

  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  if (!start.empty()) {
    const double s = std::accumulate(start.begin(), start.end(), 0.0);
    if (!(s > 0.0)) throw ValidationError("start vector must have positive mass");
    for (std::size_t i = 0; i < n; ++i) pi[i] = start[i] / s;
  }
  const double lambda = q.max_exit_rate() + 1.0;
  std::vector<double> flow(n);

  auto residual = [&] {
    q.left_multiply(pi, flow);
    double r = 0.0;
    for (double f : flow) r += std::abs(f);
    return r / lambda;
  };

  double r = residual();
  std::size_t it = 0;
  while (r > opts.tol && it < opts.max_iter) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pi[i] = std::max(0.0, pi[i] + flow[i] / lambda);
      total += pi[i];
    }
    for (double& p : pi) p /= total;
    ++it;
    r = residual();
  }
  if (r > opts.tol) {
    throw NumericalError("stationary distribution did not converge in " +
                         std::to_string(opts.max_iter) +
                         " iterations (residual " + format_exact(r) + ")");
  }
  result.pi = std::move(pi);
  result.iterations = it;
  result.residual = r;
  return result;
}

IlsrFit ilsr_fit(const ComparisonSet& comparisons, const IlsrOptions& opts) {
  const std::size_t n = comparisons.size();
  if (n == 0) throw ValidationError("ilsr_fit: empty item universe");
  if (opts.alpha < 0.0) throw ValidationError("alpha must be >= 0");

  IlsrFit fit;
  for (std::size_t i : comparisons.unobserved()) {
    fit.unobserved.push_back(comparisons.items()[i]);
  }
  if (opts.alpha == 0.0 && n > 1) {
    const auto comps = comparisons.strong_components();
    if (comps.size() > 1) {
      std::string msg = "comparison graph is not strongly connected (" +
                        std::to_string(comps.size()) +
                        " components) and alpha = 0:";
      for (const auto& comp : comps) {
        msg += " {";
        for (std::size_t k = 0; k < comp.size(); ++k) {
          if (k) msg += ",";
          msg += comparisons.items()[comp[k]];
        }
        msg += "}";
      }
      throw NumericalError(msg);
    }
  }

  std::vector<double> theta(n, 1.0 / static_cast<double>(n));
  if (n > 1) {
    for (std::size_t iter = 1; iter <= opts.max_iter; ++iter) {
      const RateMatrix q = build_chain(comparisons, theta, opts.alpha);
      StationaryResult st;
      if (n <= opts.direct_limit) {
        st.pi = dense_stationary(q);
      } else {
        try {
          st = stationary_distribution(q, opts.inner, theta);
        } catch (const NumericalError&) {
          if (n > kDenseFallbackLimit) throw;
          st.pi = dense_stationary(q);
        }
      }
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) change += std::abs(st.pi[i] - theta[i]);
      if (std::any_of(st.pi.begin(), st.pi.end(),
                      [](double p) { return !(p > 0.0); })) {
        throw NumericalError("ILSR produced a zero strength; increase alpha");
      }
      theta = std::move(st.pi);
      fit.iterations = iter;
      fit.last_change = change;
      if (change < opts.tol) {
        fit.converged = true;
        break;
      }
    }
  } else {
    fit.converged = true;
  }
  fit.strengths.item_ids = comparisons.items();
  fit.strengths.theta = std::move(theta);
  return fit;
}

IlsrFit ilsr_fit(std::span<const PairwiseComparison> comparisons,
                 const IlsrOptions& opts,
                 std::span<const std::string> universe) {
  return ilsr_fit(ComparisonSet::from(comparisons, universe), opts);
}

double log_likelihood(const ComparisonSet& comparisons,
                      std::span<const double> theta) {
  double ll = 0.0;
  for (const auto& e : comparisons.edges()) {
    const double w = theta[e.winner];
    const double l = theta[e.loser];
    ll += e.count * (std::log(w) - std::log(w + l));
  }
  return ll;
}

double regularized_log_likelihood(const ComparisonSet& comparisons,
                                  std::span<const double> theta, double alpha) {
  const double n = static_cast<double>(theta.size());
  double prior = 0.0;
  double total = 0.0;
  for (double t : theta) {
    prior += std::log(t);
    total += t;
  }
  return log_likelihood(comparisons, theta) + alpha / n * prior -
         alpha * std::log(total);
}

// ---------------------------------------------------------------------------
// Scores

double percentile(std::vector<double> data, double q) {
  if (data.empty()) throw ValidationError("percentile of empty data");
  std::sort(data.begin(), data.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(data.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, data.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return data[lo] + (data[hi] - data[lo]) * frac;
}

namespace {

std::vector<double> centered_logs(std::span<const double> theta) {
  std::vector<double> logs(theta.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    logs[i] = std::log(theta[i]);
    mean += logs[i];
  }
  mean /= static_cast<double>(theta.size());
  for (double& v : logs) v -= mean;
  return logs;
}

}  // namespace

double auto_scale(std::span<const double> theta) {
  if (theta.empty()) return 1.0;
  const auto logs = centered_logs(theta);
  const double band = percentile(logs, 0.99) - percentile(logs, 0.01);
  return band > 1e-12 ? band : 1.0;
}

ScoreTable to_scores(const StrengthVector& strengths,
                     const ScoreTransform& transform,
                     std::span<const std::string> unobserved) {
  strengths.validate();
  ScoreProvenance prov;
  prov.auto_scale = !transform.scale.has_value();
  prov.scale = transform.scale ? *transform.scale : auto_scale(strengths.theta);
  if (!(prov.scale > 0.0)) throw ValidationError("score scale must be > 0");
  prov.alpha = transform.alpha;
  prov.unobserved.assign(unobserved.begin(), unobserved.end());

  const auto logs = centered_logs(strengths.theta);
  std::vector<ScoreEntry> entries;
  entries.reserve(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const double raw = logs[i] / prov.scale;
    const double score = std::clamp(raw, -1.0, 1.0);
    if (score != raw) ++prov.clipped;
    entries.push_back({strengths.item_ids[i], score, strengths.theta[i]});
  }
  return ScoreTable(std::move(entries), std::move(prov));
}

ScoreTable fit_scores(std::span<const PairwiseComparison> comparisons,
                      const ScorerConfig& config,
                      std::span<const std::string> universe) {
  const IlsrFit fit = ilsr_fit(comparisons, config.ilsr, universe);
  return to_scores(fit.strengths, {config.scale, config.ilsr.alpha},
                   fit.unobserved);
}

}  // namespace stereoscore
