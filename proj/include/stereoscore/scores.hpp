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

// ScoreTable: per-item stereotype scores in [-1, 1], and the scores CSV
// (`id,score,theta`) shared by the fitter, the predictor and the analyses.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace stereoscore {

struct ScoreEntry {
  std::string id;
  double score = 0.0;
  std::optional<double> theta;  // present when produced by a fit

  bool operator==(const ScoreEntry&) const = default;
};

// How strengths were turned into scores.
struct ScoreProvenance {
  double scale = 1.0;
  bool auto_scale = false;
  double alpha = 0.0;
  std::size_t clipped = 0;
  // Items that took part in no comparison: their strength is the prior mass.
  std::vector<std::string> unobserved;
};

class ScoreTable {
 public:
  ScoreTable() = default;
  explicit ScoreTable(std::vector<ScoreEntry> entries,
                      ScoreProvenance provenance = {});

  const std::vector<ScoreEntry>& entries() const { return entries_; }
  const ScoreProvenance& provenance() const { return provenance_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const ScoreEntry* find(std::string_view id) const;
  // Throws NotFoundError.
  double score(std::string_view id) const;

  std::vector<double> scores() const;

 private:
  std::vector<ScoreEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  ScoreProvenance provenance_;
};

// Scores printed with 4 decimals, theta in shortest round-trip form (empty
// when absent).
std::string scores_to_csv(const ScoreTable& table);
void save_scores(const ScoreTable& table, const std::filesystem::path& path);

nlohmann::json provenance_to_json(const ScoreProvenance& p);

}  // namespace stereoscore
