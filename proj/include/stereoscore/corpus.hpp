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

// Annotation-corpus construction: selection rules for StereoSet (SS) and
// CrowS-Pairs (CP) rows, the manual removal list, and the canonical JSONL
// corpus file.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace stereoscore {

enum class Source { kSS, kCP, kExternal };
enum class GroupRole { kNone, kDisadvantaged, kAdvantaged };

std::string_view to_string(Source s);
std::string_view to_string(GroupRole r);
Source parse_source(std::string_view s);
GroupRole parse_group_role(std::string_view s);

struct Sentence {
  std::string id;
  std::string text;
  // gender/profession/race/religion for the annotation corpus; any string
  // for analysis corpora.
  std::string bias_type;
  Source source = Source::kExternal;
  GroupRole group_role = GroupRole::kNone;
  std::optional<std::string> pair_id;

  bool operator==(const Sentence&) const = default;
};

using Corpus = std::vector<Sentence>;

inline constexpr std::string_view kAnnotationBiasTypes[] = {
    "gender", "profession", "race", "religion"};

// ---------------------------------------------------------------------------
// Source rows

// One StereoSet candidate sentence, flattened out of its context group.
struct SsRow {
  std::string row_id;
  std::string context_type;  // "intrasentence" | "intersentence"
  std::string label;         // "stereotype" | "anti-stereotype" | "unrelated"
  std::string bias_type;
  std::string text;
};

// One CrowS-Pairs minimal pair.
struct CpRow {
  std::string row_id;
  std::string sent_more;
  std::string sent_less;
  std::string direction;  // "stereo" | "antistereo"
  std::string bias_type;
};

struct RejectedRow {
  std::string row_id;
  std::string reason;
};

struct Selection {
  Corpus sentences;
  std::vector<RejectedRow> rejected;
};

// Accepts either the upstream StereoSet JSON layout
// ({"data": {"intrasentence": [...], "intersentence": [...]}}) or a CSV
// with columns context_type,label,bias_type,sentence (optional id).
std::vector<SsRow> load_ss_rows(const std::filesystem::path& path);

// Upstream CrowS-Pairs CSV: sent_more,sent_less,stereo_antistereo,bias_type.
// The unnamed leading index column (or an "id" column) becomes row_id;
// otherwise the 0-based data row number is used. Extra columns are ignored.
std::vector<CpRow> load_cp_rows(const std::filesystem::path& path);

// Keeps intrasentence rows labeled "stereotype". Rows without a label or
// bias type are reported, not fatal.
Selection select_ss_sentences(std::span<const SsRow> rows);

// Keeps race-color (renamed race), gender and religion pairs. stereo picks
// sent_more as the disadvantaged-group sentence, antistereo picks sent_less
// as the advantaged-group sentence. Throws FormatError on an unknown
// direction.
Selection select_cp_sentences(std::span<const CpRow> rows);

// Maps a CP bias type onto the annotation vocabulary, or nullopt when the
// type has no SS counterpart.
std::optional<std::string> map_cp_bias_type(std::string_view cp_type);

// ---------------------------------------------------------------------------
// Manual removal

class RemovalList {
 public:
  RemovalList() = default;
  explicit RemovalList(std::span<const std::string> entries);

  // One entry per line; blank lines and lines starting with '#' skipped.
  static RemovalList load(const std::filesystem::path& path);

  // Duplicate entries (after normalization) are collapsed.
  void add(std::string_view entry);
  bool matches(const Sentence& s) const;
  // `key` must already be normalized.
  bool contains(const std::string& key) const { return index_.contains(key); }
  const std::vector<std::string>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<std::string> entries_;
  std::unordered_set<std::string> index_;
};

struct RemovalResult {
  Corpus corpus;
  std::size_t removed_count = 0;
  std::vector<std::string> unmatched;
};

// Drops every sentence whose id or NFC-normalized trimmed text is listed.
RemovalResult apply_removal_list(const Corpus& corpus,
                                 const RemovalList& removal);

// ---------------------------------------------------------------------------
// Canonical corpus file

// Generic invariants: non-empty text, unique ids, CP sentences carry a
// pair_id and SS sentences do not. Throws ValidationError.
void validate_corpus(const Corpus& corpus);

// Additionally requires every bias_type to be one of kAnnotationBiasTypes.
void validate_annotation_corpus(const Corpus& corpus);

Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string corpus_to_jsonl(const Corpus& corpus);

struct BuildReport {
  Corpus corpus;
  std::size_t ss_selected = 0;
  std::size_t cp_selected = 0;
  std::size_t removed = 0;
  std::vector<RejectedRow> rejected;
  std::vector<std::string> unmatched_removals;
};

// select SS + select CP + removal, in that order.
BuildReport build_corpus(std::span<const SsRow> ss_rows,
                         std::span<const CpRow> cp_rows,
                         const RemovalList& removal);

}  // namespace stereoscore
