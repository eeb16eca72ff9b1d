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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stereoscore/tuple_sampler.hpp"

namespace stereoscore {

// One annotator's best/worst pick on a quaternion. Indices are positions in
// the quaternion's presentation order.
struct Annotation {
  std::string tuple_id;
  std::string annotator_id;
  int best_index = 0;
  int worst_index = 0;
  std::int64_t timestamp = 0;  // UTC seconds

  bool operator==(const Annotation&) const = default;
};

// Final pick agreed on after the annotators discussed a disagreement.
struct Resolution {
  std::string tuple_id;
  int final_best_index = 0;
  int final_worst_index = 0;
  std::string resolved_by;

  bool operator==(const Resolution&) const = default;
};

// Which judgment a comparison came from: the k-th annotator (lettered A, B,
// ... in sorted annotator-id order) or a resolved/agreed final pick.
class Origin {
 public:
  static Origin resolved() { return Origin(-1); }
  static Origin annotator(int index) { return Origin(index); }
  // "resolved" or "annotator-A" ...
  static Origin parse(std::string_view s);

  bool is_resolved() const { return index_ < 0; }
  int annotator_index() const { return index_; }
  std::string str() const;

  bool operator==(const Origin&) const = default;

 private:
  explicit Origin(int index) : index_(index) {}
  int index_;
};

struct PairwiseComparison {
  std::string winner_id;
  std::string loser_id;
  std::string tuple_id;
  Origin origin = Origin::resolved();

  bool operator==(const PairwiseComparison&) const = default;
};

// Throws ValidationError unless both indices are in 0..3 and differ.
void validate_pick(int best_index, int worst_index);

// The five orderings implied by a best-worst pick: best beats the other
// three, and the two middle members beat worst. The two middle members are
// never compared. Order: best>X, best>Y, best>worst, X>worst, Y>worst with
// X before Y by position.
std::vector<PairwiseComparison> extract_comparisons(
    const Quaternion& tuple, int best_index, int worst_index,
    Origin origin = Origin::resolved());

struct Disagreements {
  std::vector<std::string> best;   // tuple ids, sorted
  std::vector<std::string> worst;  // tuple ids, sorted
};

// Only tuples judged by two or more annotators take part.
Disagreements find_disagreements(std::span<const Annotation> annotations);

enum class PolicyKind { kResolved, kPerAnnotator, kPooled };

struct ScoringPolicy {
  PolicyKind kind = PolicyKind::kResolved;
  std::string annotator_id;  // kPerAnnotator only

  static ScoringPolicy resolved() { return {PolicyKind::kResolved, {}}; }
  static ScoringPolicy pooled() { return {PolicyKind::kPooled, {}}; }
  static ScoringPolicy per_annotator(std::string id) {
    return {PolicyKind::kPerAnnotator, std::move(id)};
  }
  // "resolved" | "pooled" | "annotator:<id>"
  static ScoringPolicy parse(std::string_view s);
};

// Annotations and resolutions over a fixed tuple set. All writes go through
// one mutex (single writer); readers take a shared lock or work from an
// immutable Snapshot. When opened on a directory, every write is appended to
// annotations.jsonl / resolutions.jsonl there and the state is rebuilt from
// those logs on open.
class AnnotationStore {
 public:
  struct RecordResult {
    Annotation annotation;
    bool overwritten = false;
  };

  struct State {
    std::vector<Quaternion> tuples;
    std::unordered_map<std::string, std::size_t> tuple_index;
    // tuple_id -> annotator_id -> current annotation
    std::map<std::string, std::map<std::string, Annotation>> by_tuple;
    std::map<std::string, Resolution> resolutions;

    const Quaternion* find_tuple(std::string_view tuple_id) const;
    std::vector<std::string> annotators() const;  // sorted
    std::vector<Annotation> annotations() const;  // tuple order, then annotator
    std::vector<Resolution> resolution_list() const;  // tuple order
    Origin origin_of(const std::string& annotator_id) const;
    std::vector<PairwiseComparison> comparisons(
        const ScoringPolicy& policy) const;
    // Comparisons grouped per tuple (pooled over annotators); the unit that
    // split-half reliability partitions.
    std::vector<std::vector<PairwiseComparison>> comparisons_by_tuple(
        const ScoringPolicy& policy) const;
  };
  using Snapshot = std::shared_ptr<const State>;

  explicit AnnotationStore(std::vector<Quaternion> tuples);

  // Persistent store rooted at `dir` (created if missing).
  static std::unique_ptr<AnnotationStore> open(std::vector<Quaternion> tuples,
                                               const std::filesystem::path& dir);

  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  // Last write wins per (tuple_id, annotator_id). Throws ValidationError on
  // a bad pick and NotFoundError on an unknown tuple.
  RecordResult record_annotation(const Annotation& a);
  Resolution record_resolution(const Resolution& r);

  // Atomic check-then-write: runs `check` on the current state under the
  // writer lock and records only if it does not throw.
  RecordResult record_annotation_if(
      const Annotation& a, const std::function<void(const State&)>& check);
  Resolution record_resolution_if(
      const Resolution& r, const std::function<void(const State&)>& check);

  Snapshot snapshot() const;

  std::vector<Annotation> annotations() const;
  std::vector<Resolution> resolutions() const;
  // Fixed at construction; safe to read without locking.
  const std::vector<Quaternion>& tuples() const { return state_.tuples; }
  Disagreements find_disagreements() const;

  // resolved: one 5-pair set per annotated tuple from the resolution or the
  // unanimous pick; throws ConflictError listing unresolved tuples.
  // per_annotator: that annotator's picks only. pooled: every annotator.
  std::vector<PairwiseComparison> comparisons_for_scoring(
      const ScoringPolicy& policy = ScoringPolicy::resolved()) const;

 private:
  void apply(const Annotation& a, State& s, bool& overwritten) const;
  void apply(const Resolution& r, State& s) const;
  void append_log(const std::filesystem::path& file, const std::string& line);

  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mu_;
  State state_;
};

// Event-file formats.
std::vector<Annotation> load_annotations(const std::filesystem::path& path);
void save_annotations(std::span<const Annotation> annotations,
                      const std::filesystem::path& path);
std::vector<Resolution> load_resolutions(const std::filesystem::path& path);
void save_resolutions(std::span<const Resolution> resolutions,
                      const std::filesystem::path& path);
std::string annotation_to_json_line(const Annotation& a);
std::string resolution_to_json_line(const Resolution& r);

// Comparisons CSV: winner_id,loser_id,tuple_id,origin
std::string comparisons_to_csv(std::span<const PairwiseComparison> cs);
void save_comparisons(std::span<const PairwiseComparison> cs,
                      const std::filesystem::path& path);
std::vector<PairwiseComparison> load_comparisons(
    const std::filesystem::path& path);

}  // namespace stereoscore
