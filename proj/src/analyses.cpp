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
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"
#include "stereoscore/plackett_luce.hpp"
#include "stereoscore/random.hpp"
#include "stereoscore/reliability.hpp"

namespace stereoscore {

void validate_example(const LabeledExample& e) {
  if (!(e.score >= -1.0 && e.score <= 1.0)) {
    throw ValidationError("example " + e.id + ": score outside [-1, 1]");
  }
  if (e.binary_label && *e.binary_label != 0 && *e.binary_label != 1) {
    throw ValidationError("example " + e.id + ": binary label must be 0 or 1");
  }
  if (e.pair_role && !e.pair_id) {
    throw ValidationError("example " + e.id + ": pair role without pair id");
  }
}

// ---------------------------------------------------------------------------
// Ingestion

DatasetFormat parse_dataset_format(std::string_view s) {
  if (s == "ethos-binary") return DatasetFormat::kEthosBinary;
  if (s == "ethos-multilabel") return DatasetFormat::kEthosMultilabel;
  if (s == "sexism") return DatasetFormat::kSexism;
  if (s == "sst") return DatasetFormat::kSst;
  if (s == "cp-pairs") return DatasetFormat::kCpPairs;
  if (s == "generic") return DatasetFormat::kGeneric;
  throw ValidationError("unknown dataset format '" + std::string(s) + "'");
}

namespace {

char detect_separator(std::string_view text) {
  const std::string_view first = text.substr(0, text.find('\n'));
  const auto semis = std::count(first.begin(), first.end(), ';');
  const auto commas = std::count(first.begin(), first.end(), ',');
  return semis > commas ? ';' : ',';
}

std::size_t require(const CsvTable& t, std::string_view name, std::string_view origin) {
  try {
    return t.require_column(name);
  } catch (const FormatError& e) {
    throw FormatError(std::string(origin) + ": " + e.what());
  }
}

std::size_t require_any(const CsvTable& t, std::initializer_list<std::string_view> names,
                        std::string_view origin) {
  for (auto n : names) {
    if (auto c = t.column(n)) return *c;
  }
  std::string list;
  for (auto n : names) list += (list.empty() ? "" : " or ") + std::string(n);
  throw FormatError(std::string(origin) + ": missing required column " + list);
}

std::string row_id(const CsvTable& t, std::optional<std::size_t> id_col, std::size_t r,
                   std::string_view prefix) {
  if (id_col) {
    std::string v = trim(t.cell(r, *id_col));
    if (!v.empty()) return v;
  }
  return std::string(prefix) + std::to_string(r);
}

int parse_bool_label(std::string_view raw, std::string_view where) {
  const std::string v = to_lower_ascii(trim(raw));
  if (v == "1" || v == "true" || v == "yes") return 1;
  if (v == "0" || v == "false" || v == "no") return 0;
  throw FormatError(std::string(where) + ": not a boolean label: '" + std::string(raw) + "'");
}

std::optional<double> optional_number(const CsvTable& t, std::optional<std::size_t> col,
                                      std::size_t r, const std::string& what) {
  if (!col) return std::nullopt;
  const std::string v = trim(t.cell(r, *col));
  if (v.empty()) return std::nullopt;
  return parse_double(v, what);
}

constexpr std::string_view kEthosGroups[] = {"gender",     "race",     "national_origin",
                                             "disability", "religion", "sexual_orientation"};

}  // namespace

std::vector<LabeledExample> parse_examples(std::string_view text, DatasetFormat format,
                                           std::string_view origin) {
  std::vector<LabeledExample> out;
  if (format == DatasetFormat::kCpPairs) {
    throw ValidationError("CP pairs are read with load_examples");
  }
  const CsvTable t = parse_csv(text, detect_separator(text));
  const std::string org(origin);
  auto where = [&](std::size_t r) { return org + ":" + std::to_string(CsvTable::line_of(r)); };

  switch (format) {
    case DatasetFormat::kEthosBinary: {
      const auto text_col = require(t, "comment", origin);
      const auto label_col = require(t, "isHate", origin);
      for (std::size_t r = 0; r < t.size(); ++r) {
        LabeledExample e;
        e.id = "ethos-b-" + std::to_string(r);
        e.text = t.cell(r, text_col);
        e.binary_label = parse_double(t.cell(r, label_col), where(r) + " isHate") >= 0.5;
        out.push_back(std::move(e));
      }
      break;
    }
    case DatasetFormat::kEthosMultilabel: {
      const auto text_col = require(t, "comment", origin);
      std::vector<std::pair<std::string, std::size_t>> groups;
      for (auto g : kEthosGroups) {
        if (auto c = t.column(g)) groups.emplace_back(std::string(g), *c);
      }
      if (groups.empty()) {
        throw FormatError(org + ": no target-group columns found");
      }
      for (std::size_t r = 0; r < t.size(); ++r) {
        LabeledExample e;
        e.id = "ethos-m-" + std::to_string(r);
        e.text = t.cell(r, text_col);
        for (const auto& [name, col] : groups) {
          if (parse_double(t.cell(r, col), where(r) + " " + name) >= 0.5) {
            e.group_labels.push_back(name);
          }
        }
        out.push_back(std::move(e));
      }
      break;
    }
    case DatasetFormat::kSexism: {
      const auto id_col = t.column("id");
      const auto text_col = require(t, "text", origin);
      const auto label_col = require(t, "sexist", origin);
      const auto tox_col = t.column("toxicity");
      for (std::size_t r = 0; r < t.size(); ++r) {
        LabeledExample e;
        e.id = row_id(t, id_col, r, "sexism-");
        e.text = t.cell(r, text_col);
        e.binary_label = parse_bool_label(t.cell(r, label_col), where(r));
        e.aux_score = optional_number(t, tox_col, r, where(r) + " toxicity");
        out.push_back(std::move(e));
      }
      break;
    }
    case DatasetFormat::kSst: {
      const auto id_col = t.column("id");
      const auto text_col = require_any(t, {"sentence", "text"}, origin);
      const auto value_col = require_any(t, {"sentiment", "label"}, origin);
      for (std::size_t r = 0; r < t.size(); ++r) {
        LabeledExample e;
        e.id = row_id(t, id_col, r, "sst-");
        e.text = t.cell(r, text_col);
        e.continuous_value = parse_double(t.cell(r, value_col), where(r) + " sentiment");
        out.push_back(std::move(e));
      }
      break;
    }
    case DatasetFormat::kGeneric: {
      const auto id_col = require(t, "id", origin);
      const auto text_col = t.column("text");
      const auto score_col = t.column("score");
      const auto label_col = t.column("binary_label");
      const auto groups_col = t.column("group_labels");
      const auto aux_col = t.column("aux_score");
      const auto cont_col = t.column("continuous_value");
      const auto role_col = t.column("pair_role");
      const auto pair_col = t.column("pair_id");
      const auto bias_col = t.column("bias_type");
      for (std::size_t r = 0; r < t.size(); ++r) {
        LabeledExample e;
        e.id = trim(t.cell(r, id_col));
        if (e.id.empty()) throw FormatError(where(r) + ": empty id");
        if (text_col) e.text = t.cell(r, *text_col);
        if (auto s = optional_number(t, score_col, r, where(r) + " score")) e.score = *s;
        if (label_col && !trim(t.cell(r, *label_col)).empty()) {
          e.binary_label = parse_bool_label(t.cell(r, *label_col), where(r));
        }
        if (groups_col) {
          for (const auto& g : split(t.cell(r, *groups_col), '|')) {
            if (!trim(g).empty()) e.group_labels.push_back(trim(g));
          }
        }
        e.aux_score = optional_number(t, aux_col, r, where(r) + " aux_score");
        e.continuous_value = optional_number(t, cont_col, r, where(r) + " continuous_value");
        if (role_col && !trim(t.cell(r, *role_col)).empty()) {
          const GroupRole role = parse_group_role(trim(t.cell(r, *role_col)));
          if (role != GroupRole::kNone) e.pair_role = role;
        }
        if (pair_col && !trim(t.cell(r, *pair_col)).empty()) e.pair_id = trim(t.cell(r, *pair_col));
        if (bias_col && !trim(t.cell(r, *bias_col)).empty()) e.bias_type = trim(t.cell(r, *bias_col));
        try {
          validate_example(e);
        } catch (const ValidationError& err) {
          throw FormatError(where(r) + ": " + err.what());
        }
        out.push_back(std::move(e));
      }
      break;
    }
    case DatasetFormat::kCpPairs:
      break;
  }
  return out;
}

std::vector<LabeledExample> load_examples(const std::filesystem::path& path,
                                          DatasetFormat format) {
  if (format != DatasetFormat::kCpPairs) {
    return parse_examples(read_file(path), format, path.string());
  }
  // Both directions: sent_more targets the disadvantaged group and sent_less
  // the advantaged one.
  std::vector<LabeledExample> out;
  for (const CpRow& row : load_cp_rows(path)) {
    const std::string pair = "cp-" + row.row_id;
    for (bool more : {true, false}) {
      LabeledExample e;
      e.id = pair + (more ? "-more" : "-less");
      e.text = normalize_text(more ? row.sent_more : row.sent_less);
      e.pair_role = more ? GroupRole::kDisadvantaged : GroupRole::kAdvantaged;
      e.pair_id = pair;
      e.bias_type = row.bias_type;
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<std::string> attach_scores(std::vector<LabeledExample>& examples,
                                       const ScoreTable& scores) {
  std::vector<std::string> missing;
  std::vector<LabeledExample> kept;
  kept.reserve(examples.size());
  for (auto& e : examples) {
    if (const ScoreEntry* s = scores.find(e.id)) {
      e.score = s->score;
      kept.push_back(std::move(e));
    } else {
      missing.push_back(e.id);
    }
  }
  examples = std::move(kept);
  return missing;
}

void attach_predictions(std::vector<LabeledExample>& examples, const RegressorModel& model) {
  for (auto& e : examples) {
    if (!e.text) throw ValidationError("example " + e.id + " has no text to score");
    e.score = model.predict(*e.text);
  }
}

// ---------------------------------------------------------------------------
// Group means

MeanCi bootstrap_mean(std::span<const double> values, const BootstrapOptions& opts,
                      std::uint64_t stream) {
  MeanCi out;
  out.n = values.size();
  if (values.empty()) throw ValidationError("bootstrap of an empty sample");
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(out.n);
  if (opts.resamples == 0) {
    out.lo = out.hi = out.mean;
    return out;
  }
  Rng rng = make_rng(opts.seed, stream);
  std::vector<double> means(opts.resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.n; ++i) s += values[uniform_index(rng, out.n)];
    m = s / static_cast<double>(out.n);
  }
  const double tail = (1.0 - opts.level) / 2.0;
  out.lo = percentile(means, tail);
  out.hi = percentile(means, 1.0 - tail);
  return out;
}

GroupComparisonReport group_mean_comparison(std::span<const LabeledExample> examples,
                                            const BootstrapOptions& opts) {
  GroupComparisonReport rep;
  rep.bootstrap = opts;
  std::vector<double> g0, g1;
  for (const auto& e : examples) {
    if (!e.binary_label) {
      ++rep.unlabeled;
      continue;
    }
    (*e.binary_label ? g1 : g0).push_back(e.score);
  }
  if (g0.empty() || g1.empty()) {
    throw ValidationError("group comparison needs both classes (label 0: " +
                          std::to_string(g0.size()) + ", label 1: " +
                          std::to_string(g1.size()) + ")");
  }
  rep.group0 = bootstrap_mean(g0, opts, 0);
  rep.group1 = bootstrap_mean(g1, opts, 1);
  rep.difference = rep.group1.mean - rep.group0.mean;

  // Joint resampling for the interval of the difference.
  Rng r0 = make_rng(opts.seed, 2);
  Rng r1 = make_rng(opts.seed, 3);
  std::vector<double> diffs(opts.resamples);
  for (auto& d : diffs) {
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < g0.size(); ++i) s0 += g0[uniform_index(r0, g0.size())];
    for (std::size_t i = 0; i < g1.size(); ++i) s1 += g1[uniform_index(r1, g1.size())];
    d = s1 / static_cast<double>(g1.size()) - s0 / static_cast<double>(g0.size());
  }
  if (diffs.empty()) {
    rep.diff_lo = rep.diff_hi = rep.difference;
  } else {
    const double tail = (1.0 - opts.level) / 2.0;
    rep.diff_lo = percentile(diffs, tail);
    rep.diff_hi = percentile(diffs, 1.0 - tail);
  }
  return rep;
}

std::vector<GroupStat> per_group_means(std::span<const LabeledExample> examples,
                                       const BootstrapOptions& opts) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& e : examples) {
    std::vector<std::string> labels = e.group_labels;
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    for (const auto& g : labels) groups[g].push_back(e.score);
  }
  std::vector<GroupStat> out;
  std::uint64_t stream = 0;
  for (const auto& [name, values] : groups) {
    out.push_back({name, bootstrap_mean(values, opts, stream++)});
  }
  std::stable_sort(out.begin(), out.end(), [](const GroupStat& a, const GroupStat& b) {
    return a.stat.mean > b.stat.mean;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Separability

double ranking_separability(std::span<const LabeledExample> examples, RankingField field) {
  std::vector<std::pair<double, int>> v;
  for (const auto& e : examples) {
    if (!e.binary_label) continue;
    double x = e.score;
    if (field == RankingField::kAuxScore) {
      if (!e.aux_score) throw ValidationError("example " + e.id + " has no aux score");
      x = *e.aux_score;
    }
    v.emplace_back(x, *e.binary_label);
  }
  std::sort(v.begin(), v.end());
  double n_pos = 0, n_neg = 0, rank_sum = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j].first == v[i].first) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (v[k].second) {
        rank_sum += mid;
        ++n_pos;
      } else {
        ++n_neg;
      }
    }
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw ValidationError("separability needs both classes");
  }
  return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg);
}

SeparabilityReport separability_report(std::span<const LabeledExample> examples) {
  SeparabilityReport rep;
  rep.auc_score = ranking_separability(examples, RankingField::kScore);
  const bool all_aux = std::all_of(examples.begin(), examples.end(), [](const auto& e) {
    return !e.binary_label || e.aux_score.has_value();
  });
  if (all_aux) rep.auc_aux = ranking_separability(examples, RankingField::kAuxScore);
  for (const auto& e : examples) {
    if (!e.binary_label) continue;
    (*e.binary_label ? rep.n_positive : rep.n_negative)++;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Sentiment

std::optional<std::size_t> sentiment_bucket(double v) {
  if (!(v > 0.0) || v > 1.0) return std::nullopt;
  for (std::size_t k = 0; k < kSentimentEdges.size(); ++k) {
    if (v <= kSentimentEdges[k]) return k;
  }
  return std::nullopt;
}

SentimentReport sentiment_bucket_analysis(std::span<const LabeledExample> examples) {
  SentimentReport rep;
  std::array<double, 5> sums{};
  for (std::size_t k = 0; k < 5; ++k) {
    rep.buckets[k].lo = k ? kSentimentEdges[k - 1] : 0.0;
    rep.buckets[k].hi = kSentimentEdges[k];
  }
  for (const auto& e : examples) {
    const auto k = e.continuous_value ? sentiment_bucket(*e.continuous_value) : std::nullopt;
    if (!k) {
      rep.rejected.push_back(e.id);
      continue;
    }
    ++rep.buckets[*k].n;
    sums[*k] += e.score;
  }
  rep.strictly_decreasing = true;
  for (std::size_t k = 0; k < 5; ++k) {
    auto& b = rep.buckets[k];
    if (b.n) b.mean = sums[k] / static_cast<double>(b.n);
    if (!b.mean) rep.strictly_decreasing = false;
    if (k && b.mean && rep.buckets[k - 1].mean && !(*b.mean < *rep.buckets[k - 1].mean)) {
      rep.strictly_decreasing = false;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Paired gaps

PairGapReport paired_group_gap(std::span<const LabeledExample> examples) {
  struct Pair {
    const LabeledExample* dis = nullptr;
    const LabeledExample* adv = nullptr;
  };
  std::map<std::string, Pair> pairs;
  for (const auto& e : examples) {
    if (!e.pair_role || *e.pair_role == GroupRole::kNone) continue;
    if (!e.pair_id) throw ValidationError("example " + e.id + ": pair role without pair id");
    Pair& p = pairs[*e.pair_id];
    auto& slot = *e.pair_role == GroupRole::kDisadvantaged ? p.dis : p.adv;
    if (slot) {
      throw ValidationError("pair " + *e.pair_id + " has two " +
                            std::string(to_string(*e.pair_role)) + " members");
    }
    slot = &e;
  }
  PairGapReport rep;
  std::map<std::string, TypeGap> types;
  for (const auto& [id, p] : pairs) {
    if (!p.dis || !p.adv) {
      rep.incomplete_pairs.push_back(id);
      continue;
    }
    const std::string type = p.dis->bias_type.value_or(p.adv->bias_type.value_or("unknown"));
    TypeGap& g = types[type];
    g.bias_type = type;
    ++g.n_pairs;
    g.mean_disadvantaged += p.dis->score;
    g.mean_advantaged += p.adv->score;
  }
  for (auto& [type, g] : types) {
    g.mean_disadvantaged /= static_cast<double>(g.n_pairs);
    g.mean_advantaged /= static_cast<double>(g.n_pairs);
    g.gap = g.mean_disadvantaged - g.mean_advantaged;
    rep.per_type.push_back(g);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Ablation

namespace {

AblationCell cell(const std::vector<double>& pred, const std::vector<double>& ref) {
  AblationCell c;
  c.n = pred.size();
  if (c.n >= 2) {
    try {
      c.r = pearson(pred, ref);
    } catch (const NumericalError&) {
    }
  }
  return c;
}

}  // namespace

AblationResult ablation_run(const Corpus& corpus, const ScoreTable& gold,
                            const AblationConfig& config,
                            std::span<const LabeledExample> target,
                            const ScoreTable& reference) {
  Corpus kept;
  for (const auto& s : corpus) {
    if (s.bias_type != config.drop) kept.push_back(s);
  }
  if (kept.size() == corpus.size()) {
    throw ValidationError("bias type '" + config.drop + "' does not occur in the corpus");
  }
  const ScoredDataset ds = split_dataset(kept, gold, config.ratios, config.seed);
  AblationResult res;
  res.dropped = config.drop;
  res.n_train = ds.count(Split::kTrain);
  res.n_val = ds.count(Split::kVal);
  res.n_test = ds.count(Split::kTest);
  if (res.n_train < 5) {
    throw ValidationError("dropping '" + config.drop + "' leaves " +
                          std::to_string(res.n_train) + " training records (need 5)");
  }
  const auto train = ds.subset(Split::kTrain);
  const RegressorModel model = train_baseline(train, config.train).model;

  struct Acc {
    std::vector<double> p[3], r[3];  // dis, adv, all
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> acc;
  for (const auto& e : target) {
    const ScoreEntry* ref = reference.find(e.id);
    if (!ref || !e.text) continue;
    const std::string type = e.bias_type.value_or("unknown");
    if (!acc.contains(type)) order.push_back(type);
    Acc& a = acc[type];
    const double p = model.predict(*e.text);
    if (e.pair_role == GroupRole::kDisadvantaged) {
      a.p[0].push_back(p);
      a.r[0].push_back(ref->score);
    } else if (e.pair_role == GroupRole::kAdvantaged) {
      a.p[1].push_back(p);
      a.r[1].push_back(ref->score);
    }
    a.p[2].push_back(p);
    a.r[2].push_back(ref->score);
  }
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& type : order) {
    const Acc& a = acc[type];
    AblationRow row{type, cell(a.p[0], a.r[0]), cell(a.p[1], a.r[1]), cell(a.p[2], a.r[2])};
    lowest = std::min(lowest, row.all.r.value_or(-std::numeric_limits<double>::infinity()));
    res.rows.push_back(std::move(row));
  }
  for (const auto& row : res.rows) {
    if (row.all.r.value_or(-std::numeric_limits<double>::infinity()) <= lowest) {
      res.attributed.push_back(row.bias_type);
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Output

namespace {

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json mean_ci(const MeanCi& m) {
  return {{"n", m.n}, {"mean", m.mean}, {"ci_low", m.lo}, {"ci_high", m.hi}};
}

nlohmann::json bootstrap_json(const BootstrapOptions& b) {
  return {{"resamples", b.resamples}, {"seed", b.seed}, {"level", b.level}};
}

nlohmann::json cell_json(const AblationCell& c) { return {{"r", opt(c.r)}, {"n", c.n}}; }

}  // namespace

nlohmann::json to_json(const GroupComparisonReport& r) {
  return {{"group0", mean_ci(r.group0)},
          {"group1", mean_ci(r.group1)},
          {"difference", r.difference},
          {"difference_ci_low", r.diff_lo},
          {"difference_ci_high", r.diff_hi},
          {"unlabeled", r.unlabeled},
          {"bootstrap", bootstrap_json(r.bootstrap)}};
}

nlohmann::json to_json(const std::vector<GroupStat>& groups, const BootstrapOptions& opts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& g : groups) {
    auto j = mean_ci(g.stat);
    j["group"] = g.group;
    arr.push_back(std::move(j));
  }
  return {{"groups", arr}, {"bootstrap", bootstrap_json(opts)}};
}

nlohmann::json to_json(const SeparabilityReport& r) {
  nlohmann::json j = {{"auc_score", r.auc_score},
                      {"auc_aux", opt(r.auc_aux)},
                      {"n_positive", r.n_positive},
                      {"n_negative", r.n_negative}};
  if (r.auc_aux) j["score_separates_better"] = r.auc_score > *r.auc_aux;
  return j;
}

nlohmann::json to_json(const SentimentReport& r) {
  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& b : r.buckets) {
    buckets.push_back({{"lo", b.lo}, {"hi", b.hi}, {"n", b.n}, {"mean", opt(b.mean)}});
  }
  return {{"buckets", buckets},
          {"strictly_decreasing", r.strictly_decreasing},
          {"rejected", r.rejected}};
}

nlohmann::json to_json(const PairGapReport& r) {
  nlohmann::json types = nlohmann::json::array();
  for (const auto& g : r.per_type) {
    types.push_back({{"bias_type", g.bias_type},
                     {"n_pairs", g.n_pairs},
                     {"mean_disadvantaged", g.mean_disadvantaged},
                     {"mean_advantaged", g.mean_advantaged},
                     {"gap", g.gap}});
  }
  return {{"per_type", types}, {"incomplete_pairs", r.incomplete_pairs}};
}

nlohmann::json to_json(const AblationResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"bias_type", row.bias_type},
                    {"disadvantaged", cell_json(row.disadvantaged)},
                    {"advantaged", cell_json(row.advantaged)},
                    {"all", cell_json(row.all)}});
  }
  return {{"dropped", r.dropped},
          {"split", {{"train", r.n_train}, {"val", r.n_val}, {"test", r.n_test}}},
          {"rows", rows},
          {"attributed", r.attributed}};
}

std::string scatter_csv(std::span<const LabeledExample> examples, ScatterX x,
                        std::optional<std::size_t> per_class, std::uint64_t seed) {
  std::map<std::string, std::vector<const LabeledExample*>> classes;
  for (const auto& e : examples) {
    const auto xv = x == ScatterX::kAuxScore ? e.aux_score : e.continuous_value;
    if (!xv) continue;
    std::string cls = "all";
    if (e.binary_label) {
      cls = std::to_string(*e.binary_label);
    } else if (e.continuous_value) {
      const auto b = sentiment_bucket(*e.continuous_value);
      if (!b) continue;
      cls = std::to_string(*b + 1);
    }
    classes[cls].push_back(&e);
  }
  std::string out = "id,class,x,score\n";
  std::uint64_t stream = 0;
  for (auto& [cls, members] : classes) {
    if (per_class && members.size() > *per_class) {
      Rng rng = make_rng(seed, stream);
      shuffle(members, rng);
      members.resize(*per_class);
      std::stable_sort(members.begin(), members.end(),
                       [&](const LabeledExample* a, const LabeledExample* b) { return a < b; });
    }
    ++stream;
    for (const auto* e : members) {
      const double xv = x == ScatterX::kAuxScore ? *e->aux_score : *e->continuous_value;
      out += csv_line({e->id, cls, format_exact(xv), format_exact(e->score)});
    }
  }
  return out;
}

}  // namespace stereoscore
