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

#include "stereoscore/scores.hpp"

#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"

namespace stereoscore {

ScoreTable::ScoreTable(std::vector<ScoreEntry> entries,
                       ScoreProvenance provenance)
    : entries_(std::move(entries)), provenance_(std::move(provenance)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i].id, i).second) {
      throw ValidationError("duplicate id '" + entries_[i].id +
                            "' in score table");
    }
  }
}

const ScoreEntry* ScoreTable::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

double ScoreTable::score(std::string_view id) const {
  if (const auto* e = find(id)) return e->score;
  throw NotFoundError("no score for id '" + std::string(id) + "'");
}

std::vector<double> ScoreTable::scores() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.score);
  return out;
}

std::string scores_to_csv(const ScoreTable& table) {
  std::string out = "id,score,theta\n";
  for (const auto& e : table.entries()) {
    out += csv_line({e.id, format_fixed(e.score, 4),
                     e.theta ? format_exact(*e.theta) : std::string()});
  }
  return out;
}

void save_scores(const ScoreTable& table, const std::filesystem::path& path) {
  write_file(path, scores_to_csv(table));
}

nlohmann::json provenance_to_json(const ScoreProvenance& p) {
  return {{"transform", "centered_log_strength"},
          {"scale", p.scale},
          {"auto_scale", p.auto_scale},
          {"alpha", p.alpha},
          {"clipped", p.clipped},
          {"unobserved", p.unobserved}};
}

}  // namespace stereoscore
