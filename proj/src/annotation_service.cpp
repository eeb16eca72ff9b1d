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

#include "stereoscore/annotation_service.hpp"

#include <algorithm>
#include <ctime>
#include <set>

#include "httplib.h"
#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"
#include "stereoscore/reliability.hpp"

namespace stereoscore {

ServiceConfig parse_service_config(const nlohmann::json& j) {
  ServiceConfig c;
  try {
    if (!j.is_object()) throw FormatError("service config must be a JSON object");
    if (j.contains("annotators")) {
      const auto& a = j["annotators"];
      if (a.is_object()) {
        for (const auto& [id, tok] : a.items()) {
          const auto token = tok.get<std::string>();
          if (token.empty()) throw FormatError("empty token for annotator " + id);
          c.tokens[id] = token;
          c.annotators.push_back(id);
        }
      } else {
        c.annotators = a.get<std::vector<std::string>>();
      }
    }
    c.scorer.ilsr.alpha = j.value("alpha", c.scorer.ilsr.alpha);
    if (j.contains("scale") && !j["scale"].is_null()) c.scorer.scale = j["scale"].get<double>();
    if (j.contains("policy")) c.policy = ScoringPolicy::parse(j["policy"].get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.reliability_splits = j.value("reliability_splits", c.reliability_splits);
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("service config: ") + e.what());
  }
  std::set<std::string> seen;
  for (const auto& [id, tok] : c.tokens) {
    if (!seen.insert(tok).second) throw FormatError("token shared by two annotators");
  }
  return c;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  try {
    return parse_service_config(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

AnnotationService::AnnotationService(Corpus corpus, AnnotationStore& store, ServiceConfig config)
    : corpus_(std::move(corpus)), store_(store), config_(std::move(config)) {
  for (std::size_t i = 0; i < corpus_.size(); ++i) sentence_index_.emplace(corpus_[i].id, i);
  for (const auto& q : store_.tuples()) {
    for (const auto& id : q.sentence_ids) {
      if (!sentence_index_.contains(id)) {
        throw ValidationError("tuple " + q.tuple_id + " names sentence " + id +
                              " missing from the corpus");
      }
    }
  }
}

void AnnotationService::require_annotator(const std::string& annotator_id) const {
  if (annotator_id.empty()) throw ValidationError("annotator id is empty");
  if (config_.annotators.empty()) return;
  if (std::find(config_.annotators.begin(), config_.annotators.end(), annotator_id) ==
      config_.annotators.end()) {
    throw NotFoundError("unknown annotator '" + annotator_id + "'");
  }
}

std::optional<std::string> AnnotationService::annotator_for_token(std::string_view token) const {
  for (const auto& [id, tok] : config_.tokens) {
    if (tok == token) return id;
  }
  return std::nullopt;
}

TupleView AnnotationService::view(const Quaternion& q) const {
  TupleView v;
  v.tuple_id = q.tuple_id;
  for (std::size_t k = 0; k < kTupleSize; ++k) {
    v.sentences[k] = corpus_[sentence_index_.at(q.sentence_ids[k])];
  }
  return v;
}

std::optional<TupleView> AnnotationService::next_tuple(const std::string& annotator_id) {
  require_annotator(annotator_id);
  const auto snap = store_.snapshot();
  std::lock_guard lock(cursor_mu_);
  std::size_t& i = cursor_[annotator_id];
  for (; i < snap->tuples.size(); ++i) {
    const auto it = snap->by_tuple.find(snap->tuples[i].tuple_id);
    if (it == snap->by_tuple.end() || !it->second.contains(annotator_id)) {
      return view(snap->tuples[i]);
    }
  }
  return std::nullopt;
}

Progress AnnotationService::submit(const std::string& annotator_id, const std::string& tuple_id,
                                   int best_index, int worst_index) {
  validate_pick(best_index, worst_index);
  require_annotator(annotator_id);
  Annotation a{tuple_id, annotator_id, best_index, worst_index,
               static_cast<std::int64_t>(std::time(nullptr))};
  store_.record_annotation_if(a, [&](const AnnotationStore::State& s) {
    if (!s.find_tuple(tuple_id)) throw NotFoundError("unknown tuple '" + tuple_id + "'");
    const auto it = s.by_tuple.find(tuple_id);
    if (it != s.by_tuple.end() && it->second.contains(annotator_id)) {
      throw ConflictError("tuple " + tuple_id + " was already annotated by " + annotator_id);
    }
  });
  return progress(annotator_id);
}

std::size_t AnnotationService::open_disagreements(const AnnotationStore::State& s) const {
  const Disagreements d = find_disagreements(s.annotations());
  std::set<std::string> open(d.best.begin(), d.best.end());
  open.insert(d.worst.begin(), d.worst.end());
  std::size_t n = 0;
  for (const auto& id : open) n += !s.resolutions.contains(id);
  return n;
}

std::size_t AnnotationService::disagreements_open() const {
  return open_disagreements(*store_.snapshot());
}

Progress AnnotationService::progress_of(const AnnotationStore::State& s,
                                        const std::string& annotator_id) const {
  Progress p;
  p.annotator_id = annotator_id;
  p.total = s.tuples.size();
  for (const auto& [tuple, by_annotator] : s.by_tuple) p.done += by_annotator.contains(annotator_id);
  p.remaining = p.total - p.done;
  p.disagreements_open = open_disagreements(s);
  return p;
}

Progress AnnotationService::progress(const std::string& annotator_id) const {
  require_annotator(annotator_id);
  return progress_of(*store_.snapshot(), annotator_id);
}

std::vector<Progress> AnnotationService::progress_all() const {
  const auto snap = store_.snapshot();
  std::set<std::string> ids(config_.annotators.begin(), config_.annotators.end());
  for (const auto& id : snap->annotators()) ids.insert(id);
  std::vector<Progress> out;
  for (const auto& id : ids) out.push_back(progress_of(*snap, id));
  return out;
}

std::vector<DisagreementItem> AnnotationService::disagreement_feed() const {
  const auto snap = store_.snapshot();
  const Disagreements d = find_disagreements(snap->annotations());
  const std::set<std::string> best(d.best.begin(), d.best.end());
  const std::set<std::string> worst(d.worst.begin(), d.worst.end());
  std::vector<DisagreementItem> out;
  for (const auto& q : snap->tuples) {
    const bool b = best.contains(q.tuple_id);
    const bool w = worst.contains(q.tuple_id);
    if ((!b && !w) || snap->resolutions.contains(q.tuple_id)) continue;
    DisagreementItem item;
    item.tuple = view(q);
    for (const auto& [annotator, a] : snap->by_tuple.at(q.tuple_id)) item.picks.push_back(a);
    item.best_differs = b;
    item.worst_differs = w;
    out.push_back(std::move(item));
  }
  return out;
}

Resolution AnnotationService::resolve(const std::string& tuple_id, int best_index,
                                      int worst_index, const std::string& resolved_by) {
  validate_pick(best_index, worst_index);
  const Resolution r{tuple_id, best_index, worst_index, resolved_by};
  return store_.record_resolution_if(r, [&](const AnnotationStore::State& s) {
    if (!s.find_tuple(tuple_id)) throw NotFoundError("unknown tuple '" + tuple_id + "'");
    if (s.resolutions.contains(tuple_id)) {
      throw ConflictError("tuple " + tuple_id + " is already resolved");
    }
    const auto it = s.by_tuple.find(tuple_id);
    std::set<int> bests, worsts;
    if (it != s.by_tuple.end()) {
      for (const auto& [annotator, a] : it->second) {
        bests.insert(a.best_index);
        worsts.insert(a.worst_index);
      }
    }
    if (bests.size() < 2 && worsts.size() < 2) {
      throw ConflictError("tuple " + tuple_id + " has no disagreement to resolve");
    }
  });
}

void AnnotationService::require_annotations(const AnnotationStore::State& s,
                                            const char* step) const {
  if (s.by_tuple.empty()) {
    throw PrerequisiteError(std::string("no annotations recorded yet; submit annotations before ") +
                            step);
  }
}

FitSummary AnnotationService::fit() {
  const auto snap = store_.snapshot();
  require_annotations(*snap, "fitting");
  const auto comparisons = snap->comparisons(config_.policy);
  std::vector<std::string> universe;
  std::set<std::string> seen;
  for (const auto& q : snap->tuples) {
    for (const auto& id : q.sentence_ids) {
      if (seen.insert(id).second) universe.push_back(id);
    }
  }
  auto table = std::make_shared<const ScoreTable>(
      fit_scores(comparisons, config_.scorer, universe));
  FitSummary s;
  s.n_items = table->size();
  s.n_comparisons = comparisons.size();
  s.unobserved = table->provenance().unobserved.size();
  s.clipped = table->provenance().clipped;
  s.scale = table->provenance().scale;
  std::unique_lock lock(scores_mu_);
  scores_ = std::move(table);
  return s;
}

std::shared_ptr<const ScoreTable> AnnotationService::scores() const {
  std::shared_lock lock(scores_mu_);
  return scores_;
}

std::string AnnotationService::export_comparisons() const {
  const auto snap = store_.snapshot();
  require_annotations(*snap, "exporting comparisons");
  return comparisons_to_csv(snap->comparisons(config_.policy));
}

std::string AnnotationService::export_scores() const {
  const auto table = scores();
  if (!table) throw PrerequisiteError("no fitted scores; run fit before exporting scores");
  return scores_to_csv(*table);
}

nlohmann::json AnnotationService::export_report() const {
  const auto snap = store_.snapshot();
  require_annotations(*snap, "building the reliability report");
  ReliabilityReport rep;
  rep.seed = config_.seed;
  nlohmann::json notes = nlohmann::json::array();
  nlohmann::json agreement = nullptr;
  const auto annotators = snap->annotators();
  if (annotators.size() >= 2) {
    try {
      const auto a = inter_annotator_agreement(*snap, config_.scorer);
      rep.inter_annotator_r = a.r;
      agreement = {{"annotator_a", a.annotator_a},
                   {"annotator_b", a.annotator_b},
                   {"n_common", a.n_common}};
    } catch (const Error& e) {
      notes.push_back(std::string("inter-annotator agreement unavailable: ") + e.what());
    }
  } else {
    notes.push_back("inter-annotator agreement needs two annotators");
  }
  if (snap->by_tuple.size() >= 2 && config_.reliability_splits > 0) {
    SplitHalfOptions opts;
    opts.n_splits = config_.reliability_splits;
    opts.seed = config_.seed;
    opts.scorer = config_.scorer;
    const auto shr = split_half_reliability(*snap, opts);
    rep.shr_mean_r = shr.shr_mean_r;
    rep.shr_per_split = shr.shr_per_split;
    rep.n_splits = shr.n_splits;
    rep.skipped_splits = shr.skipped_splits;
  } else {
    notes.push_back("split-half reliability needs two annotated tuples");
  }
  nlohmann::json j = report_to_json(rep);
  j["agreement"] = agreement;
  j["annotators"] = annotators;
  j["tuples_annotated"] = snap->by_tuple.size();
  j["resolutions"] = snap->resolutions.size();
  j["notes"] = notes;
  return j;
}

// ---------------------------------------------------------------------------
// HTTP

int http_status_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const FormatError*>(&e)) return 422;
  if (dynamic_cast<const NotFoundError*>(&e)) return 404;
  if (dynamic_cast<const ConflictError*>(&e) || dynamic_cast<const PrerequisiteError*>(&e)) {
    return 409;
  }
  return 500;
}

nlohmann::json to_json(const TupleView& v) {
  nlohmann::json sentences = nlohmann::json::array();
  for (const auto& s : v.sentences) sentences.push_back({{"id", s.id}, {"text", s.text}});
  return {{"tuple_id", v.tuple_id}, {"sentences", sentences}};
}

nlohmann::json to_json(const Progress& p) {
  return {{"annotator_id", p.annotator_id},
          {"total", p.total},
          {"done", p.done},
          {"remaining", p.remaining},
          {"disagreements_open", p.disagreements_open}};
}

namespace {

struct HttpError {
  int status;
  std::string message;
};

const char* error_code(int status) {
  switch (status) {
    case 401: return "unauthorized";
    case 403: return "forbidden";
    case 404: return "not_found";
    case 409: return "conflict";
    case 422: return "validation";
    default: return "internal";
  }
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", {{"code", error_code(status)}, {"message", message}}}}
                      .dump(),
                  "application/json");
}

void send_json(httplib::Response& res, const nlohmann::json& j) {
  res.status = 200;
  res.set_content(j.dump(), "application/json");
}

// Annotator behind the request's bearer token; nullopt when auth is off.
std::optional<std::string> authenticate(const AnnotationService& svc, const httplib::Request& req) {
  if (!svc.auth_enabled()) return std::nullopt;
  const std::string header = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (header.rfind(kPrefix, 0) != 0) throw HttpError{401, "missing bearer token"};
  auto who = svc.annotator_for_token(std::string_view(header).substr(kPrefix.size()));
  if (!who) throw HttpError{401, "invalid token"};
  return who;
}

void require_self(const std::optional<std::string>& caller, const std::string& annotator) {
  if (caller && *caller != annotator) {
    throw HttpError{403, "token does not belong to annotator " + annotator};
  }
}

nlohmann::json body_of(const httplib::Request& req) {
  try {
    auto j = nlohmann::json::parse(req.body);
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed JSON body: ") + e.what());
  }
}

template <typename T>
T field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw ValidationError(std::string("missing field '") + name + "'");
  try {
    return j[name].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("field '") + name + "' has the wrong type");
  }
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const HttpError& e) {
      send_error(res, e.status, e.message);
    } catch (const std::exception& e) {
      send_error(res, http_status_for(e), e.what());
    }
  };
}

}  // namespace

void register_routes(httplib::Server& server, AnnotationService& svc,
                     const std::optional<std::filesystem::path>& static_dir) {
  server.Get(R"(/v1/annotators/([^/]+)/next)", guarded([&svc](const auto& req, auto& res) {
    const std::string who = req.matches[1];
    require_self(authenticate(svc, req), who);
    const auto next = svc.next_tuple(who);
    if (!next) {
      send_json(res, {{"exhausted", true}, {"progress", to_json(svc.progress(who))}});
    } else {
      auto j = to_json(*next);
      j["exhausted"] = false;
      send_json(res, j);
    }
  }));

  server.Post("/v1/annotations", guarded([&svc](const auto& req, auto& res) {
    const auto caller = authenticate(svc, req);
    const auto body = body_of(req);
    const auto who = field<std::string>(body, "annotator_id");
    require_self(caller, who);
    send_json(res, to_json(svc.submit(who, field<std::string>(body, "tuple_id"),
                                      field<int>(body, "best_index"),
                                      field<int>(body, "worst_index"))));
  }));

  server.Get("/v1/disagreements", guarded([&svc](const auto& req, auto& res) {
    authenticate(svc, req);
    nlohmann::json items = nlohmann::json::array();
    for (const auto& d : svc.disagreement_feed()) {
      auto j = to_json(d.tuple);
      nlohmann::json picks = nlohmann::json::array();
      for (const auto& a : d.picks) {
        picks.push_back({{"annotator_id", a.annotator_id},
                         {"best_index", a.best_index},
                         {"worst_index", a.worst_index}});
      }
      j["picks"] = picks;
      j["best_differs"] = d.best_differs;
      j["worst_differs"] = d.worst_differs;
      items.push_back(std::move(j));
    }
    send_json(res, {{"items", items}});
  }));

  server.Post("/v1/resolutions", guarded([&svc](const auto& req, auto& res) {
    const auto caller = authenticate(svc, req);
    const auto body = body_of(req);
    const std::string by = body.contains("resolved_by")
                               ? field<std::string>(body, "resolved_by")
                               : caller.value_or("discussion");
    const auto r = svc.resolve(field<std::string>(body, "tuple_id"),
                               field<int>(body, "final_best_index"),
                               field<int>(body, "final_worst_index"), by);
    send_json(res, nlohmann::json::parse(resolution_to_json_line(r)));
  }));

  server.Get("/v1/progress", guarded([&svc](const auto& req, auto& res) {
    authenticate(svc, req);
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : svc.progress_all()) list.push_back(to_json(p));
    send_json(res, {{"total", svc.total_tuples()},
                    {"annotators", list},
                    {"disagreements_open", svc.disagreements_open()}});
  }));

  server.Post("/v1/fit", guarded([&svc](const auto& req, auto& res) {
    authenticate(svc, req);
    const FitSummary s = svc.fit();
    send_json(res, {{"n_items", s.n_items},
                    {"n_comparisons", s.n_comparisons},
                    {"unobserved", s.unobserved},
                    {"clipped", s.clipped},
                    {"scale", s.scale}});
  }));

  server.Get(R"(/v1/export/([^/]+))", guarded([&svc](const auto& req, auto& res) {
    authenticate(svc, req);
    const std::string kind = req.matches[1];
    if (kind == "comparisons") {
      res.set_content(svc.export_comparisons(), "text/csv");
    } else if (kind == "scores") {
      res.set_content(svc.export_scores(), "text/csv");
    } else if (kind == "report") {
      res.set_content(svc.export_report().dump(2), "application/json");
    } else {
      throw NotFoundError("unknown export kind '" + kind + "'");
    }
    res.status = 200;
  }));

  if (static_dir) {
    if (!server.set_mount_point("/", static_dir->string())) {
      throw NotFoundError("static directory " + static_dir->string() + " does not exist");
    }
  }
}

}  // namespace stereoscore
