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

// Annotation service: per-annotator tuple queues over an AnnotationStore,
// disagreement resolution, exports, and the /v1 JSON API on top.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "stereoscore/annotation_store.hpp"
#include "stereoscore/corpus.hpp"
#include "stereoscore/plackett_luce.hpp"
#include "stereoscore/scores.hpp"

namespace httplib {
class Server;
}

namespace stereoscore {

struct ServiceConfig {
  // annotator id -> bearer token. An empty map turns authentication off and
  // lets any annotator id in.
  std::map<std::string, std::string> tokens;
  // Registered annotators when authentication is off; empty = anyone.
  std::vector<std::string> annotators;
  ScorerConfig scorer;
  ScoringPolicy policy = ScoringPolicy::resolved();
  std::size_t reliability_splits = 100;
  std::uint64_t seed = 0;
  std::string host = "127.0.0.1";
  int port = 8080;
};

// JSON config file:
//   {"annotators": {"ann1": "token", ...} | ["ann1", ...],
//    "alpha": 0.1, "scale": 0.5, "policy": "resolved", "seed": 0,
//    "reliability_splits": 100, "host": "127.0.0.1", "port": 8080}
// Throws FormatError.
ServiceConfig load_service_config(const std::filesystem::path& path);
ServiceConfig parse_service_config(const nlohmann::json& j);

struct TupleView {
  std::string tuple_id;
  std::array<Sentence, kTupleSize> sentences;
};

struct Progress {
  std::string annotator_id;
  std::size_t total = 0;
  std::size_t done = 0;
  std::size_t remaining = 0;
  std::size_t disagreements_open = 0;
};

struct DisagreementItem {
  TupleView tuple;
  std::vector<Annotation> picks;  // one per annotator, sorted by annotator
  bool best_differs = false;
  bool worst_differs = false;
};

struct FitSummary {
  std::size_t n_items = 0;
  std::size_t n_comparisons = 0;
  std::size_t unobserved = 0;
  std::size_t clipped = 0;
  double scale = 0.0;
};

class AnnotationService {
 public:
  AnnotationService(Corpus corpus, AnnotationStore& store, ServiceConfig config);

  const ServiceConfig& config() const { return config_; }

  // Throws NotFoundError for an unregistered annotator.
  void require_annotator(const std::string& annotator_id) const;
  // Annotator owning `token`, or nullopt.
  std::optional<std::string> annotator_for_token(std::string_view token) const;
  bool auth_enabled() const { return !config_.tokens.empty(); }

  // Head of the annotator's queue (sampler order, not yet annotated by
  // them), or nullopt once exhausted. Does not consume.
  std::optional<TupleView> next_tuple(const std::string& annotator_id);

  // ValidationError on a bad pick, NotFoundError on an unknown tuple or
  // annotator, ConflictError when the annotator already judged the tuple.
  Progress submit(const std::string& annotator_id, const std::string& tuple_id,
                  int best_index, int worst_index);

  Progress progress(const std::string& annotator_id) const;
  std::vector<Progress> progress_all() const;
  std::size_t total_tuples() const { return store_.tuples().size(); }
  std::size_t disagreements_open() const;

  // Unresolved tuples whose annotators disagree on best or worst.
  std::vector<DisagreementItem> disagreement_feed() const;
  // ValidationError on a bad pick, ConflictError when the tuple is not in
  // the feed.
  Resolution resolve(const std::string& tuple_id, int best_index, int worst_index,
                     const std::string& resolved_by);

  // PrerequisiteError without annotations; ConflictError (from the store)
  // while disagreements are unresolved under the resolved policy.
  FitSummary fit();
  std::string export_comparisons() const;
  // PrerequisiteError before fit().
  std::string export_scores() const;
  nlohmann::json export_report() const;

  std::shared_ptr<const ScoreTable> scores() const;

 private:
  TupleView view(const Quaternion& q) const;
  std::size_t open_disagreements(const AnnotationStore::State& s) const;
  Progress progress_of(const AnnotationStore::State& s, const std::string& annotator_id) const;
  void require_annotations(const AnnotationStore::State& s, const char* step) const;

  Corpus corpus_;
  std::unordered_map<std::string, std::size_t> sentence_index_;
  AnnotationStore& store_;
  ServiceConfig config_;

  mutable std::mutex cursor_mu_;
  std::unordered_map<std::string, std::size_t> cursor_;

  mutable std::shared_mutex scores_mu_;
  std::shared_ptr<const ScoreTable> scores_;
};

// ---------------------------------------------------------------------------
// HTTP

// HTTP status for an exception thrown by the service.
int http_status_for(const std::exception& e);

nlohmann::json to_json(const TupleView& v);
nlohmann::json to_json(const Progress& p);

// Registers the /v1 routes (and the static mount when `static_dir` is set).
void register_routes(httplib::Server& server, AnnotationService& service,
                     const std::optional<std::filesystem::path>& static_dir = {});

}  // namespace stereoscore
