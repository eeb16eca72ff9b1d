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

#include "stereoscore/annotation_store.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"

namespace stereoscore {

Origin Origin::parse(std::string_view s) {
  if (s == "resolved") return resolved();
  constexpr std::string_view kPrefix = "annotator-";
  if (s.starts_with(kPrefix) && s.size() == kPrefix.size() + 1) {
    const char c = s.back();
    if (c >= 'A' && c <= 'Z') return annotator(c - 'A');
  }
  throw FormatError("unknown comparison origin '" + std::string(s) + "'");
}

std::string Origin::str() const {
  if (is_resolved()) return "resolved";
  if (index_ >= 26) {
    throw ValidationError("more than 26 annotators cannot be lettered");
  }
  return std::string("annotator-") + static_cast<char>('A' + index_);
}

ScoringPolicy ScoringPolicy::parse(std::string_view s) {
  if (s == "resolved") return resolved();
  if (s == "pooled") return pooled();
  if (s.starts_with("annotator:") && s.size() > 10) {
    return per_annotator(std::string(s.substr(10)));
  }
  throw ValidationError("unknown scoring policy '" + std::string(s) +
                        "' (expected resolved, pooled or annotator:<id>)");
}

void validate_pick(int best_index, int worst_index) {
  const auto in_range = [](int i) {
    return i >= 0 && i < static_cast<int>(kTupleSize);
  };
  if (!in_range(best_index) || !in_range(worst_index)) {
    throw ValidationError("pick indices must be in 0..3");
  }
  if (best_index == worst_index) {
    throw ValidationError("best and worst must differ");
  }
}

std::vector<PairwiseComparison> extract_comparisons(const Quaternion& tuple,
                                                    int best_index,
                                                    int worst_index,
                                                    Origin origin) {
  validate_pick(best_index, worst_index);
  const auto& ids = tuple.sentence_ids;
  const auto& best = ids[static_cast<std::size_t>(best_index)];
  const auto& worst = ids[static_cast<std::size_t>(worst_index)];

  std::vector<std::size_t> middle;
  for (std::size_t k = 0; k < kTupleSize; ++k) {
    if (static_cast<int>(k) != best_index && static_cast<int>(k) != worst_index) {
      middle.push_back(k);
    }
  }
  std::vector<PairwiseComparison> out;
  out.reserve(5);
  for (std::size_t m : middle) {
    out.push_back({best, ids[m], tuple.tuple_id, origin});
  }
  out.push_back({best, worst, tuple.tuple_id, origin});
  for (std::size_t m : middle) {
    out.push_back({ids[m], worst, tuple.tuple_id, origin});
  }
  return out;
}

Disagreements find_disagreements(std::span<const Annotation> annotations) {
  std::map<std::string, std::map<std::string, const Annotation*>> by_tuple;
  for (const auto& a : annotations) by_tuple[a.tuple_id][a.annotator_id] = &a;

  Disagreements out;
  for (const auto& [tuple_id, picks] : by_tuple) {
    if (picks.size() < 2) continue;
    std::set<int> bests;
    std::set<int> worsts;
    for (const auto& [annotator, a] : picks) {
      bests.insert(a->best_index);
      worsts.insert(a->worst_index);
    }
    if (bests.size() > 1) out.best.push_back(tuple_id);
    if (worsts.size() > 1) out.worst.push_back(tuple_id);
  }
  return out;  // std::map iteration keeps both lists sorted
}

// ---------------------------------------------------------------------------
// State

const Quaternion* AnnotationStore::State::find_tuple(
    std::string_view tuple_id) const {
  const auto it = tuple_index.find(std::string(tuple_id));
  return it == tuple_index.end() ? nullptr : &tuples[it->second];
}

std::vector<std::string> AnnotationStore::State::annotators() const {
  std::set<std::string> ids;
  for (const auto& [tuple_id, picks] : by_tuple) {
    for (const auto& [annotator, a] : picks) ids.insert(annotator);
  }
  return {ids.begin(), ids.end()};
}

std::vector<Annotation> AnnotationStore::State::annotations() const {
  std::vector<Annotation> out;
  for (const auto& t : tuples) {
    const auto it = by_tuple.find(t.tuple_id);
    if (it == by_tuple.end()) continue;
    for (const auto& [annotator, a] : it->second) out.push_back(a);
  }
  return out;
}

std::vector<Resolution> AnnotationStore::State::resolution_list() const {
  std::vector<Resolution> out;
  for (const auto& t : tuples) {
    const auto it = resolutions.find(t.tuple_id);
    if (it != resolutions.end()) out.push_back(it->second);
  }
  return out;
}

Origin AnnotationStore::State::origin_of(const std::string& annotator_id) const {
  const auto ids = annotators();
  const auto it = std::find(ids.begin(), ids.end(), annotator_id);
  if (it == ids.end()) {
    throw NotFoundError("annotator '" + annotator_id + "' has no annotations");
  }
  return Origin::annotator(static_cast<int>(it - ids.begin()));
}

std::vector<std::vector<PairwiseComparison>>
AnnotationStore::State::comparisons_by_tuple(const ScoringPolicy& policy) const {
  const auto ids = annotators();
  auto origin_for = [&](const std::string& annotator) {
    const auto it = std::find(ids.begin(), ids.end(), annotator);
    return Origin::annotator(static_cast<int>(it - ids.begin()));
  };
  if (policy.kind == PolicyKind::kPerAnnotator &&
      std::find(ids.begin(), ids.end(), policy.annotator_id) == ids.end()) {
    throw NotFoundError("annotator '" + policy.annotator_id +
                        "' has no annotations");
  }

  std::vector<std::vector<PairwiseComparison>> out;
  std::vector<std::string> unresolved;
  for (const auto& t : tuples) {
    const auto it = by_tuple.find(t.tuple_id);
    if (it == by_tuple.end() || it->second.empty()) continue;
    const auto& picks = it->second;

    switch (policy.kind) {
      case PolicyKind::kResolved: {
        if (const auto r = resolutions.find(t.tuple_id); r != resolutions.end()) {
          out.push_back(extract_comparisons(t, r->second.final_best_index,
                                            r->second.final_worst_index));
          break;
        }
        const Annotation& first = picks.begin()->second;
        const bool unanimous =
            std::all_of(picks.begin(), picks.end(), [&](const auto& kv) {
              return kv.second.best_index == first.best_index &&
                     kv.second.worst_index == first.worst_index;
            });
        if (!unanimous) {
          unresolved.push_back(t.tuple_id);
          break;
        }
        out.push_back(
            extract_comparisons(t, first.best_index, first.worst_index));
        break;
      }
      case PolicyKind::kPerAnnotator: {
        const auto a = picks.find(policy.annotator_id);
        if (a == picks.end()) break;
        out.push_back(extract_comparisons(t, a->second.best_index,
                                          a->second.worst_index,
                                          origin_for(policy.annotator_id)));
        break;
      }
      case PolicyKind::kPooled: {
        std::vector<PairwiseComparison> pooled;
        for (const auto& [annotator, a] : picks) {
          auto cs = extract_comparisons(t, a.best_index, a.worst_index,
                                        origin_for(annotator));
          pooled.insert(pooled.end(), cs.begin(), cs.end());
        }
        out.push_back(std::move(pooled));
        break;
      }
    }
  }
  if (!unresolved.empty()) {
    std::sort(unresolved.begin(), unresolved.end());
    std::string msg = "unresolved disagreements in " +
                      std::to_string(unresolved.size()) + " tuple(s):";
    for (const auto& id : unresolved) msg += " " + id;
    throw ConflictError(msg);
  }
  return out;
}

std::vector<PairwiseComparison> AnnotationStore::State::comparisons(
    const ScoringPolicy& policy) const {
  std::vector<PairwiseComparison> flat;
  for (auto& group : comparisons_by_tuple(policy)) {
    flat.insert(flat.end(), group.begin(), group.end());
  }
  return flat;
}

// ---------------------------------------------------------------------------
// Store

AnnotationStore::AnnotationStore(std::vector<Quaternion> tuples) {
  validate_tuples(tuples);
  state_.tuples = std::move(tuples);
  for (std::size_t i = 0; i < state_.tuples.size(); ++i) {
    state_.tuple_index.emplace(state_.tuples[i].tuple_id, i);
  }
}

std::unique_ptr<AnnotationStore> AnnotationStore::open(
    std::vector<Quaternion> tuples, const std::filesystem::path& dir) {
  auto store = std::make_unique<AnnotationStore>(std::move(tuples));
  std::filesystem::create_directories(dir);
  const auto ann = dir / "annotations.jsonl";
  const auto res = dir / "resolutions.jsonl";
  if (std::filesystem::exists(ann)) {
    for (const auto& a : load_annotations(ann)) {
      bool overwritten = false;
      store->apply(a, store->state_, overwritten);
    }
  }
  if (std::filesystem::exists(res)) {
    for (const auto& r : load_resolutions(res)) store->apply(r, store->state_);
  }
  store->dir_ = dir;
  return store;
}

void AnnotationStore::apply(const Annotation& a, State& s,
                            bool& overwritten) const {
  validate_pick(a.best_index, a.worst_index);
  if (a.annotator_id.empty()) throw ValidationError("annotator_id is empty");
  if (!s.find_tuple(a.tuple_id)) {
    throw NotFoundError("unknown tuple '" + a.tuple_id + "'");
  }
  auto& slot = s.by_tuple[a.tuple_id];
  overwritten = slot.contains(a.annotator_id);
  slot[a.annotator_id] = a;
}

void AnnotationStore::apply(const Resolution& r, State& s) const {
  validate_pick(r.final_best_index, r.final_worst_index);
  if (!s.find_tuple(r.tuple_id)) {
    throw NotFoundError("unknown tuple '" + r.tuple_id + "'");
  }
  s.resolutions[r.tuple_id] = r;
}

void AnnotationStore::append_log(const std::filesystem::path& file,
                                 const std::string& line) {
  std::ofstream out(file, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot append to " + file.string());
  out << line;
  out.flush();
  if (!out) throw Error("write failed on " + file.string());
}

AnnotationStore::RecordResult AnnotationStore::record_annotation(
    const Annotation& a) {
  return record_annotation_if(a, [](const State&) {});
}

AnnotationStore::RecordResult AnnotationStore::record_annotation_if(
    const Annotation& a, const std::function<void(const State&)>& check) {
  std::unique_lock lock(mu_);
  check(state_);
  // A rejected write must not reach the event log.
  validate_pick(a.best_index, a.worst_index);
  if (!state_.find_tuple(a.tuple_id)) {
    throw NotFoundError("unknown tuple '" + a.tuple_id + "'");
  }
  if (dir_) append_log(*dir_ / "annotations.jsonl", annotation_to_json_line(a));
  RecordResult result{a, false};
  apply(a, state_, result.overwritten);
  return result;
}

Resolution AnnotationStore::record_resolution(const Resolution& r) {
  return record_resolution_if(r, [](const State&) {});
}

Resolution AnnotationStore::record_resolution_if(
    const Resolution& r, const std::function<void(const State&)>& check) {
  std::unique_lock lock(mu_);
  check(state_);
  validate_pick(r.final_best_index, r.final_worst_index);
  if (!state_.find_tuple(r.tuple_id)) {
    throw NotFoundError("unknown tuple '" + r.tuple_id + "'");
  }
  if (dir_) append_log(*dir_ / "resolutions.jsonl", resolution_to_json_line(r));
  apply(r, state_);
  return r;
}

AnnotationStore::Snapshot AnnotationStore::snapshot() const {
  std::shared_lock lock(mu_);
  return std::make_shared<const State>(state_);
}

std::vector<Annotation> AnnotationStore::annotations() const {
  std::shared_lock lock(mu_);
  return state_.annotations();
}

std::vector<Resolution> AnnotationStore::resolutions() const {
  std::shared_lock lock(mu_);
  return state_.resolution_list();
}

Disagreements AnnotationStore::find_disagreements() const {
  const auto all = annotations();
  return stereoscore::find_disagreements(all);
}

std::vector<PairwiseComparison> AnnotationStore::comparisons_for_scoring(
    const ScoringPolicy& policy) const {
  std::shared_lock lock(mu_);
  return state_.comparisons(policy);
}

// ---------------------------------------------------------------------------
// Files

std::string annotation_to_json_line(const Annotation& a) {
  nlohmann::ordered_json j;
  j["tuple_id"] = a.tuple_id;
  j["annotator_id"] = a.annotator_id;
  j["best_index"] = a.best_index;
  j["worst_index"] = a.worst_index;
  j["timestamp"] = a.timestamp;
  return j.dump() + "\n";
}

std::string resolution_to_json_line(const Resolution& r) {
  nlohmann::ordered_json j;
  j["tuple_id"] = r.tuple_id;
  j["final_best_index"] = r.final_best_index;
  j["final_worst_index"] = r.final_worst_index;
  j["resolved_by"] = r.resolved_by;
  return j.dump() + "\n";
}

std::vector<Annotation> load_annotations(const std::filesystem::path& path) {
  std::vector<Annotation> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t) {
    Annotation a;
    a.tuple_id = j.at("tuple_id").get<std::string>();
    a.annotator_id = j.at("annotator_id").get<std::string>();
    a.best_index = j.at("best_index").get<int>();
    a.worst_index = j.at("worst_index").get<int>();
    a.timestamp = j.value("timestamp", std::int64_t{0});
    out.push_back(std::move(a));
  });
  return out;
}

void save_annotations(std::span<const Annotation> annotations,
                      const std::filesystem::path& path) {
  std::string out;
  for (const auto& a : annotations) out += annotation_to_json_line(a);
  write_file(path, out);
}

std::vector<Resolution> load_resolutions(const std::filesystem::path& path) {
  std::vector<Resolution> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t) {
    Resolution r;
    r.tuple_id = j.at("tuple_id").get<std::string>();
    r.final_best_index = j.at("final_best_index").get<int>();
    r.final_worst_index = j.at("final_worst_index").get<int>();
    r.resolved_by = j.value("resolved_by", "");
    out.push_back(std::move(r));
  });
  return out;
}

void save_resolutions(std::span<const Resolution> resolutions,
                      const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : resolutions) out += resolution_to_json_line(r);
  write_file(path, out);
}

std::string comparisons_to_csv(std::span<const PairwiseComparison> cs) {
  std::string out = "winner_id,loser_id,tuple_id,origin\n";
  for (const auto& c : cs) {
    out += csv_line({c.winner_id, c.loser_id, c.tuple_id, c.origin.str()});
  }
  return out;
}

void save_comparisons(std::span<const PairwiseComparison> cs,
                      const std::filesystem::path& path) {
  write_file(path, comparisons_to_csv(cs));
}

std::vector<PairwiseComparison> load_comparisons(
    const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto w = t.require_column("winner_id");
  const auto l = t.require_column("loser_id");
  const auto tid = t.column("tuple_id");
  const auto origin = t.column("origin");
  std::vector<PairwiseComparison> out;
  out.reserve(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    PairwiseComparison c;
    c.winner_id = t.cell(r, w);
    c.loser_id = t.cell(r, l);
    if (c.winner_id.empty() || c.loser_id.empty() || c.winner_id == c.loser_id) {
      throw FormatError(path.string() + ":" +
                        std::to_string(CsvTable::line_of(r)) +
                        ": invalid comparison row");
    }
    if (tid) c.tuple_id = t.cell(r, *tid);
    if (origin && !t.cell(r, *origin).empty()) {
      c.origin = Origin::parse(t.cell(r, *origin));
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace stereoscore
