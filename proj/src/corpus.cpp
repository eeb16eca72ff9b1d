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

#include "stereoscore/corpus.hpp"

#include <algorithm>
#include <unordered_map>

#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"

namespace stereoscore {

std::string_view to_string(Source s) {
  switch (s) {
    case Source::kSS:
      return "SS";
    case Source::kCP:
      return "CP";
    case Source::kExternal:
      return "external";
  }
  return "external";
}

std::string_view to_string(GroupRole r) {
  switch (r) {
    case GroupRole::kNone:
      return "none";
    case GroupRole::kDisadvantaged:
      return "disadvantaged";
    case GroupRole::kAdvantaged:
      return "advantaged";
  }
  return "none";
}

Source parse_source(std::string_view s) {
  if (s == "SS") return Source::kSS;
  if (s == "CP") return Source::kCP;
  if (s == "external") return Source::kExternal;
  throw FormatError("unknown source '" + std::string(s) + "'");
}

GroupRole parse_group_role(std::string_view s) {
  if (s == "none") return GroupRole::kNone;
  if (s == "disadvantaged") return GroupRole::kDisadvantaged;
  if (s == "advantaged") return GroupRole::kAdvantaged;
  throw FormatError("unknown group_role '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Loaders

namespace {

std::vector<SsRow> ss_rows_from_json(const Json& doc) {
  std::vector<SsRow> rows;
  const Json& data = doc.contains("data") ? doc.at("data") : doc;
  for (const char* context_type : {"intrasentence", "intersentence"}) {
    if (!data.contains(context_type)) continue;
    for (const Json& group : data.at(context_type)) {
      const std::string group_id = group.value("id", "");
      const std::string bias = group.value("bias_type", "");
      const Json& sentences = group.at("sentences");
      for (std::size_t k = 0; k < sentences.size(); ++k) {
        const Json& s = sentences[k];
        SsRow row;
        row.row_id = s.value("id", group_id + "-" + std::to_string(k));
        row.context_type = context_type;
        row.label = s.value("gold_label", "");
        row.bias_type = bias;
        row.text = s.value("sentence", "");
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<SsRow> ss_rows_from_csv(const CsvTable& t) {
  const auto ctx = t.require_column("context_type");
  const auto label = t.column("label");
  const auto bias = t.column("bias_type");
  const auto text = t.require_column("sentence");
  const auto id = t.column("id");
  std::vector<SsRow> rows;
  rows.reserve(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    SsRow row;
    row.row_id = id ? t.cell(r, *id) : std::to_string(r);
    row.context_type = trim(t.cell(r, ctx));
    row.label = label ? trim(t.cell(r, *label)) : "";
    row.bias_type = bias ? trim(t.cell(r, *bias)) : "";
    row.text = t.cell(r, text);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<SsRow> load_ss_rows(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  const std::string head = trim(content.substr(0, 64));
  if (head.starts_with("{")) {
    try {
      return ss_rows_from_json(Json::parse(content));
    } catch (const Json::exception& e) {
      throw FormatError(path.string() + ": not a StereoSet JSON file: " +
                        e.what());
    }
  }
  return ss_rows_from_csv(parse_csv(content));
}

std::vector<CpRow> load_cp_rows(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto more = t.require_column("sent_more");
  const auto less = t.require_column("sent_less");
  const auto dir = t.require_column("stereo_antistereo");
  const auto bias = t.require_column("bias_type");
  std::optional<std::size_t> id = t.column("id");
  if (!id && !t.header().empty() && trim(t.header()[0]).empty()) id = 0;

  std::vector<CpRow> rows;
  rows.reserve(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    CpRow row;
    row.row_id = id ? trim(t.cell(r, *id)) : std::to_string(r);
    row.sent_more = t.cell(r, more);
    row.sent_less = t.cell(r, less);
    row.direction = trim(t.cell(r, dir));
    row.bias_type = trim(t.cell(r, bias));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Selection

Selection select_ss_sentences(std::span<const SsRow> rows) {
  Selection out;
  for (const SsRow& row : rows) {
    if (row.label.empty() || row.bias_type.empty()) {
      out.rejected.push_back(
          {row.row_id, row.label.empty() ? "missing label" : "missing bias type"});
      continue;
    }
    if (row.context_type != "intrasentence" || row.label != "stereotype") {
      continue;
    }
    const std::string text = normalize_text(row.text);
    if (text.empty()) {
      out.rejected.push_back({row.row_id, "empty sentence"});
      continue;
    }
    Sentence s;
    s.id = "ss-" + row.row_id;
    s.text = text;
    s.bias_type = row.bias_type;
    s.source = Source::kSS;
    s.group_role = GroupRole::kNone;
    out.sentences.push_back(std::move(s));
  }
  return out;
}

std::optional<std::string> map_cp_bias_type(std::string_view cp_type) {
  if (cp_type == "race-color") return "race";
  if (cp_type == "gender") return "gender";
  if (cp_type == "religion") return "religion";
  return std::nullopt;
}

Selection select_cp_sentences(std::span<const CpRow> rows) {
  Selection out;
  for (const CpRow& row : rows) {
    const bool stereo = row.direction == "stereo";
    if (!stereo && row.direction != "antistereo") {
      throw FormatError("CP row " + row.row_id + ": unknown direction '" +
                        row.direction + "'");
    }
    if (row.bias_type.empty()) {
      out.rejected.push_back({row.row_id, "missing bias type"});
      continue;
    }
    const auto bias = map_cp_bias_type(row.bias_type);
    if (!bias) continue;

    const std::string text =
        normalize_text(stereo ? row.sent_more : row.sent_less);
    if (text.empty()) {
      out.rejected.push_back({row.row_id, "empty sentence"});
      continue;
    }
    Sentence s;
    s.id = "cp-" + row.row_id + (stereo ? "-more" : "-less");
    s.text = text;
    s.bias_type = *bias;
    s.source = Source::kCP;
    s.group_role =
        stereo ? GroupRole::kDisadvantaged : GroupRole::kAdvantaged;
    s.pair_id = "cp-" + row.row_id;
    out.sentences.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Removal

RemovalList::RemovalList(std::span<const std::string> entries) {
  for (const auto& e : entries) add(e);
}

RemovalList RemovalList::load(const std::filesystem::path& path) {
  RemovalList list;
  for (const auto& line : split(read_file(path), '\n')) {
    const std::string t = trim(line);
    if (t.empty() || t.starts_with('#')) continue;
    list.add(t);
  }
  return list;
}

void RemovalList::add(std::string_view entry) {
  std::string key = normalize_text(entry);
  if (key.empty()) return;
  if (index_.insert(key).second) entries_.push_back(std::move(key));
}

bool RemovalList::matches(const Sentence& s) const {
  return index_.contains(normalize_text(s.id)) ||
         index_.contains(normalize_text(s.text));
}

RemovalResult apply_removal_list(const Corpus& corpus,
                                 const RemovalList& removal) {
  RemovalResult out;
  std::unordered_set<std::string> hit;
  for (const Sentence& s : corpus) {
    const std::string id = normalize_text(s.id);
    const std::string text = normalize_text(s.text);
    bool removed = false;
    for (const auto& key : {id, text}) {
      if (removal.contains(key)) {
        hit.insert(key);
        removed = true;
      }
    }
    if (removed) {
      ++out.removed_count;
    } else {
      out.corpus.push_back(s);
    }
  }
  for (const auto& e : removal.entries()) {
    if (!hit.contains(e)) out.unmatched.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus file

void validate_corpus(const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  for (const Sentence& s : corpus) {
    if (s.id.empty()) throw ValidationError("sentence with empty id");
    if (!seen.insert(s.id).second) {
      throw ValidationError("duplicate sentence id '" + s.id + "'");
    }
    if (trim(s.text).empty()) {
      throw ValidationError("sentence '" + s.id + "' has empty text");
    }
    if (s.source == Source::kCP && !s.pair_id) {
      throw ValidationError("CP sentence '" + s.id + "' lacks a pair_id");
    }
    if (s.source == Source::kSS && s.pair_id) {
      throw ValidationError("SS sentence '" + s.id + "' carries a pair_id");
    }
  }
}

void validate_annotation_corpus(const Corpus& corpus) {
  validate_corpus(corpus);
  for (const Sentence& s : corpus) {
    if (std::find(std::begin(kAnnotationBiasTypes),
                  std::end(kAnnotationBiasTypes),
                  s.bias_type) == std::end(kAnnotationBiasTypes)) {
      throw ValidationError("sentence '" + s.id + "' has bias type '" +
                            s.bias_type +
                            "' outside the annotation vocabulary");
    }
  }
}

namespace {

Sentence sentence_from_json(const Json& j) {
  Sentence s;
  s.id = j.at("id").get<std::string>();
  s.text = j.at("text").get<std::string>();
  s.bias_type = j.at("bias_type").get<std::string>();
  s.source = parse_source(j.at("source").get<std::string>());
  s.group_role = parse_group_role(j.value("group_role", "none"));
  if (j.contains("pair_id") && !j.at("pair_id").is_null()) {
    s.pair_id = j.at("pair_id").get<std::string>();
  }
  return s;
}

nlohmann::ordered_json sentence_to_json(const Sentence& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["text"] = s.text;
  j["bias_type"] = s.bias_type;
  j["source"] = to_string(s.source);
  j["group_role"] = to_string(s.group_role);
  j["pair_id"] = s.pair_id ? nlohmann::ordered_json(*s.pair_id)
                           : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path) {
  Corpus corpus;
  std::unordered_map<std::string, std::size_t> line_of_id;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    Sentence s;
    try {
      s = sentence_from_json(j);
    } catch (const std::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line) + ": " +
                        e.what());
    }
    if (auto [it, inserted] = line_of_id.emplace(s.id, line); !inserted) {
      throw FormatError(path.string() + ":" + std::to_string(line) +
                        ": duplicate id '" + s.id + "' (first seen on line " +
                        std::to_string(it->second) + ")");
    }
    corpus.push_back(std::move(s));
  });
  validate_corpus(corpus);
  return corpus;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const Sentence& s : corpus) out += sentence_to_json(s).dump() + "\n";
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  validate_corpus(corpus);
  write_file(path, corpus_to_jsonl(corpus));
}

BuildReport build_corpus(std::span<const SsRow> ss_rows,
                         std::span<const CpRow> cp_rows,
                         const RemovalList& removal) {
  BuildReport report;
  Selection ss = select_ss_sentences(ss_rows);
  Selection cp = select_cp_sentences(cp_rows);
  report.ss_selected = ss.sentences.size();
  report.cp_selected = cp.sentences.size();
  report.rejected = std::move(ss.rejected);
  report.rejected.insert(report.rejected.end(), cp.rejected.begin(),
                         cp.rejected.end());

  Corpus combined = std::move(ss.sentences);
  combined.insert(combined.end(), cp.sentences.begin(), cp.sentences.end());
  RemovalResult removed = apply_removal_list(combined, removal);
  report.corpus = std::move(removed.corpus);
  report.removed = removed.removed_count;
  report.unmatched_removals = std::move(removed.unmatched);
  validate_annotation_corpus(report.corpus);
  return report;
}

}  // namespace stereoscore
