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
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"
#include "stereoscore/predictor.hpp"
#include "stereoscore/random.hpp"
#include "stereoscore/simulate.hpp"
#include "test_util.hpp"

using namespace stereoscore;

namespace {

Corpus small_corpus(std::size_t n) {
  Corpus c;
  const char* types[] = {"gender", "profession", "race", "religion"};
  for (std::size_t i = 0; i < n; ++i) {
    c.push_back({"s" + std::to_string(i), "Sentence number " + std::to_string(i) + ".",
                 types[i % 4], Source::kSS, GroupRole::kNone, {}});
  }
  return c;
}

struct Fixture {
  explicit Fixture(std::size_t n_tuples = 3, ServiceConfig cfg = {})
      : corpus(small_corpus(12)),
        store(sample_tuples(corpus, n_tuples, 11)),
        service(corpus, store, std::move(cfg)) {}

  Corpus corpus;
  AnnotationStore store;
  AnnotationService service;
};

// Strength of sentence s<i> grows with i, so the oracle is deterministic.
OracleAnnotator planted(const Corpus& corpus) {
  std::unordered_map<std::string, double> w;
  for (std::size_t i = 0; i < corpus.size(); ++i) w[corpus[i].id] = std::exp(0.3 * i);
  return OracleAnnotator(std::move(w), OracleAnnotator::Mode::kNoiseless);
}

void annotate_all(Fixture& f, const std::string& who) {
  const auto oracle = planted(f.corpus);
  Rng rng = make_rng(0);
  while (auto t = f.service.next_tuple(who)) {
    const auto [b, w] = oracle.pick(*f.store.snapshot()->find_tuple(t->tuple_id), rng);
    f.service.submit(who, t->tuple_id, b, w);
  }
}

}  // namespace

TEST_CASE("next_tuple") {
  Fixture f;
  const auto first = f.service.next_tuple("ann1");
  REQUIRE(first);
  CHECK(first->tuple_id == f.store.tuples()[0].tuple_id);
  CHECK(first->sentences[2].id == f.store.tuples()[0].sentence_ids[2]);
  CHECK(first->sentences[2].text.find("Sentence number") == 0);
  CHECK(f.service.next_tuple("ann1")->tuple_id == first->tuple_id);

  annotate_all(f, "ann1");
  CHECK_FALSE(f.service.next_tuple("ann1"));
  // Shared order: a second annotator starts at the top.
  CHECK(f.service.next_tuple("ann2")->tuple_id == first->tuple_id);
}

TEST_CASE("registered annotators") {
  ServiceConfig cfg;
  cfg.annotators = {"ann1"};
  Fixture f(3, cfg);
  CHECK(f.service.next_tuple("ann1"));
  CHECK_THROWS_AS(f.service.next_tuple("ghost"), NotFoundError);
  CHECK_THROWS_AS(f.service.submit("ghost", f.store.tuples()[0].tuple_id, 0, 1), NotFoundError);
}

TEST_CASE("submit") {
  Fixture f;
  const std::string t0 = f.store.tuples()[0].tuple_id;
  const auto p = f.service.submit("ann1", t0, 0, 3);
  CHECK(p.done == 1);
  CHECK(p.remaining == 2);
  CHECK(f.service.next_tuple("ann1")->tuple_id == f.store.tuples()[1].tuple_id);

  try {
    f.service.submit("ann1", f.store.tuples()[1].tuple_id, 2, 2);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()) == "best and worst must differ");
  }
  CHECK(f.service.progress("ann1").remaining == 2);
  CHECK(f.service.next_tuple("ann1")->tuple_id == f.store.tuples()[1].tuple_id);

  CHECK_THROWS_AS(f.service.submit("ann1", t0, 1, 2), ConflictError);
  CHECK(f.service.progress("ann1").done == 1);
  CHECK(f.store.annotations().size() == 1);
  CHECK_THROWS_AS(f.service.submit("ann1", "q-missing", 1, 2), NotFoundError);

  // Out-of-order submission is allowed; the head skips past it later.
  f.service.submit("ann1", f.store.tuples()[2].tuple_id, 1, 0);
  CHECK(f.service.next_tuple("ann1")->tuple_id == f.store.tuples()[1].tuple_id);
  f.service.submit("ann1", f.store.tuples()[1].tuple_id, 1, 0);
  CHECK_FALSE(f.service.next_tuple("ann1"));
}

TEST_CASE("annotated tuples never come back") {
  Fixture f(30);
  Rng rng = make_rng(5);
  std::set<std::string> done;
  for (int step = 0; step < 60; ++step) {
    const auto head = f.service.next_tuple("a");
    if (!head) break;
    CHECK_FALSE(done.contains(head->tuple_id));
    // Sometimes answer a later tuple instead of the head.
    std::string target = head->tuple_id;
    if (uniform01(rng) < 0.3) {
      const auto& ts = f.store.tuples();
      const auto& cand = ts[uniform_index(rng, ts.size())].tuple_id;
      if (!done.contains(cand)) target = cand;
    }
    const auto p = f.service.submit("a", target, 0, 1);
    done.insert(target);
    CHECK(p.done + p.remaining == p.total);
    CHECK(p.done == done.size());
  }
  CHECK(done.size() == 30);
}

TEST_CASE("concurrent submits keep counters consistent") {
  Fixture f(40);
  std::atomic<int> accepted{0}, conflicts{0};
  std::vector<std::thread> workers;
  for (int w = 0; w < 6; ++w) {
    workers.emplace_back([&, w] {
      const std::string who = w % 2 ? "ann1" : "ann2";
      for (const auto& q : f.store.tuples()) {
        try {
          const auto p = f.service.submit(who, q.tuple_id, 0, 1 + w % 3);
          CHECK(p.done + p.remaining == p.total);
          ++accepted;
        } catch (const ConflictError&) {
          ++conflicts;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  CHECK(accepted == 80);
  CHECK(conflicts == 6 * 40 - 80);
  for (const auto& p : f.service.progress_all()) {
    CHECK(p.done == 40);
    CHECK(p.remaining == 0);
  }
}

TEST_CASE("disagreement feed and resolution") {
  Fixture f;
  const auto& ts = f.store.tuples();
  for (const auto& q : ts) {
    f.service.submit("ann1", q.tuple_id, 0, 3);
    f.service.submit("ann2", q.tuple_id, 0, 3);
  }
  CHECK(f.service.disagreement_feed().empty());
  CHECK_THROWS_AS(f.service.resolve(ts[0].tuple_id, 0, 3, "team"), ConflictError);

  Fixture g;
  const auto& gt = g.store.tuples();
  for (const auto& q : gt) {
    g.service.submit("ann1", q.tuple_id, 0, 3);
    g.service.submit("ann2", q.tuple_id, 0, q.tuple_id == gt[1].tuple_id ? 2 : 3);
  }
  const auto feed = g.service.disagreement_feed();
  REQUIRE(feed.size() == 1);
  CHECK(feed[0].tuple.tuple_id == gt[1].tuple_id);
  CHECK(feed[0].worst_differs);
  CHECK_FALSE(feed[0].best_differs);
  CHECK(feed[0].picks.size() == 2);
  CHECK(g.service.progress("ann1").disagreements_open == 1);
  CHECK_THROWS_AS(g.service.resolve(gt[1].tuple_id, 1, 1, "team"), ValidationError);
  CHECK_THROWS_AS(g.service.export_comparisons(), ConflictError);

  g.service.resolve(gt[1].tuple_id, 0, 2, "team");
  CHECK(g.service.disagreement_feed().empty());
  CHECK_THROWS_AS(g.service.resolve(gt[1].tuple_id, 0, 2, "team"), ConflictError);
  CHECK(g.store.resolutions().size() == 1);
}

TEST_CASE("exports") {
  ServiceConfig cfg;
  cfg.reliability_splits = 10;
  Fixture f(20, cfg);
  CHECK_THROWS_AS(f.service.export_comparisons(), PrerequisiteError);
  CHECK_THROWS_AS(f.service.export_report(), PrerequisiteError);
  CHECK_THROWS_AS(f.service.fit(), PrerequisiteError);
  CHECK_THROWS_AS(f.service.export_scores(), PrerequisiteError);

  annotate_all(f, "ann1");
  annotate_all(f, "ann2");
  const std::string csv = f.service.export_comparisons();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);
  CHECK_THROWS_AS(f.service.export_scores(), PrerequisiteError);

  const auto summary = f.service.fit();
  CHECK(summary.n_comparisons == 100);
  CHECK(summary.n_items == 12);
  const std::string scores = f.service.export_scores();
  const auto imported = parse_scores_csv(scores, "export");
  REQUIRE(imported.table.size() == 12);
  for (const auto& e : f.service.scores()->entries()) {
    CHECK(std::abs(imported.table.score(e.id) - e.score) <= 5e-5 + 1e-12);
  }
  // Planted strengths grow with the index.
  CHECK(imported.table.score("s11") > imported.table.score("s0"));

  const auto report = f.service.export_report();
  CHECK(report["annotators"].size() == 2);
  CHECK(report["tuples_annotated"] == 20);
  CHECK(report["n_splits"] == 10);
}

TEST_CASE("service config") {
  const auto c = parse_service_config(nlohmann::json::parse(
      R"({"annotators": {"ann1": "t1", "ann2": "t2"}, "alpha": 0.2, "scale": 0.5,
          "policy": "pooled", "seed": 9, "port": 9000})"));
  CHECK(c.tokens.at("ann2") == "t2");
  CHECK(c.annotators.size() == 2);
  CHECK(c.scorer.ilsr.alpha == 0.2);
  CHECK(*c.scorer.scale == 0.5);
  CHECK(c.policy.kind == PolicyKind::kPooled);
  CHECK(c.port == 9000);
  CHECK(parse_service_config(nlohmann::json::parse(R"({"annotators": ["x"]})")).tokens.empty());
  CHECK_THROWS_AS(parse_service_config(nlohmann::json::parse(R"({"annotators": {"a": "t", "b": "t"}})")),
                  FormatError);
  CHECK_THROWS_AS(parse_service_config(nlohmann::json::parse(R"({"alpha": "x"})")), FormatError);
}

TEST_CASE("http status mapping") {
  CHECK(http_status_for(ValidationError("x")) == 422);
  CHECK(http_status_for(FormatError("x")) == 422);
  CHECK(http_status_for(NotFoundError("x")) == 404);
  CHECK(http_status_for(ConflictError("x")) == 409);
  CHECK(http_status_for(PrerequisiteError("x")) == 409);
  CHECK(http_status_for(NumericalError("x")) == 500);
}

namespace {

// Serves the routes on an ephemeral port for the lifetime of the object.
class LiveServer {
 public:
  LiveServer(AnnotationService& svc, std::optional<std::filesystem::path> static_dir = {}) {
    register_routes(server_, svc, static_dir);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_connection_timeout(5);
    return c;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

nlohmann::json json_of(const httplib::Result& r) { return nlohmann::json::parse(r->body); }

std::string submit_body(const std::string& who, const std::string& tuple, int b, int w) {
  return nlohmann::json{{"annotator_id", who}, {"tuple_id", tuple}, {"best_index", b},
                        {"worst_index", w}}
      .dump();
}

}  // namespace

TEST_CASE("http api without auth") {
  ServiceConfig cfg;
  cfg.reliability_splits = 10;
  Fixture f(20, cfg);
  LiveServer server(f.service);
  auto cli = server.client();

  auto r = cli.Get("/v1/annotators/ann1/next");
  REQUIRE(r);
  CHECK(r->status == 200);
  auto j = json_of(r);
  CHECK(j["exhausted"] == false);
  CHECK(j["sentences"].size() == 4);
  const std::string t0 = j["tuple_id"];

  r = cli.Post("/v1/annotations", submit_body("ann1", t0, 1, 1), "application/json");
  CHECK(r->status == 422);
  CHECK(json_of(r)["error"]["message"] == "best and worst must differ");
  r = cli.Post("/v1/annotations", "{not json", "application/json");
  CHECK(r->status == 422);
  r = cli.Post("/v1/annotations", R"({"annotator_id": "ann1"})", "application/json");
  CHECK(r->status == 422);
  r = cli.Post("/v1/annotations", submit_body("ann1", "nope", 0, 1), "application/json");
  CHECK(r->status == 404);

  r = cli.Post("/v1/annotations", submit_body("ann1", t0, 0, 1), "application/json");
  CHECK(r->status == 200);
  CHECK(json_of(r)["remaining"] == 19);
  r = cli.Post("/v1/annotations", submit_body("ann1", t0, 0, 1), "application/json");
  CHECK(r->status == 409);

  r = cli.Get("/v1/export/scores");
  CHECK(r->status == 409);
  CHECK(json_of(r)["error"]["message"].get<std::string>().find("fit") != std::string::npos);
  r = cli.Get("/v1/export/bogus");
  CHECK(r->status == 404);

  // Finish both annotators, disagreeing on one tuple.
  const auto oracle = planted(f.corpus);
  Rng rng = make_rng(0);
  for (const std::string who : {"ann1", "ann2"}) {
    while (true) {
      auto n = json_of(cli.Get(("/v1/annotators/" + who + "/next").c_str()));
      if (n["exhausted"] == true) {
        CHECK(n["progress"]["remaining"] == 0);
        break;
      }
      const std::string tid = n["tuple_id"];
      auto [b, w] = oracle.pick(*f.store.snapshot()->find_tuple(tid), rng);
      if (who == "ann2" && tid == t0) w = (b + 1) % 4 == w ? (b + 2) % 4 : (b + 1) % 4;
      auto s = cli.Post("/v1/annotations", submit_body(who, tid, b, w), "application/json");
      CHECK(s->status == 200);
    }
  }
  r = cli.Get("/v1/progress");
  j = json_of(r);
  CHECK(j["total"] == 20);
  CHECK(j["annotators"].size() == 2);
  r = cli.Get("/v1/disagreements");
  j = json_of(r);
  CHECK(j["items"].size() >= 1);
  CHECK(cli.Get("/v1/export/comparisons")->status == 409);

  for (const auto& item : j["items"]) {
    const auto& p = item["picks"][0];
    auto s = cli.Post("/v1/resolutions",
                      nlohmann::json{{"tuple_id", item["tuple_id"]},
                                     {"final_best_index", p["best_index"]},
                                     {"final_worst_index", p["worst_index"]}}
                          .dump(),
                      "application/json");
    CHECK(s->status == 200);
    CHECK(json_of(s)["resolved_by"] == "discussion");
  }
  CHECK(json_of(cli.Get("/v1/disagreements"))["items"].empty());
  CHECK(json_of(cli.Get("/v1/progress"))["disagreements_open"] == 0);

  r = cli.Get("/v1/export/comparisons");
  CHECK(r->status == 200);
  CHECK(std::count(r->body.begin(), r->body.end(), '\n') == 101);

  r = cli.Post("/v1/fit", "", "application/json");
  CHECK(r->status == 200);
  CHECK(json_of(r)["n_comparisons"] == 100);
  r = cli.Get("/v1/export/scores");
  CHECK(r->status == 200);
  CHECK(parse_scores_csv(r->body, "http").table.size() == 12);
  r = cli.Get("/v1/export/report");
  CHECK(r->status == 200);
  CHECK(json_of(r).contains("shr_mean_r"));
}

TEST_CASE("http api with tokens") {
  ServiceConfig cfg;
  cfg.tokens = {{"ann1", "secret-1"}, {"ann2", "secret-2"}};
  cfg.annotators = {"ann1", "ann2"};
  Fixture f(3, cfg);
  LiveServer server(f.service);
  auto cli = server.client();

  CHECK(cli.Get("/v1/annotators/ann1/next")->status == 401);
  CHECK(cli.Get("/v1/progress")->status == 401);
  cli.set_bearer_token_auth("wrong");
  CHECK(cli.Get("/v1/annotators/ann1/next")->status == 401);
  cli.set_bearer_token_auth("secret-2");
  CHECK(cli.Get("/v1/annotators/ann1/next")->status == 403);
  const auto t = f.store.tuples()[0].tuple_id;
  CHECK(cli.Post("/v1/annotations", submit_body("ann1", t, 0, 1), "application/json")->status ==
        403);
  CHECK(cli.Get("/v1/annotators/ann2/next")->status == 200);
  CHECK(cli.Get("/v1/annotators/ghost/next")->status == 403);
  CHECK(cli.Post("/v1/annotations", submit_body("ann2", t, 0, 1), "application/json")->status ==
        200);
  cli.set_bearer_token_auth("secret-1");
  CHECK(cli.Post("/v1/annotations", submit_body("ann1", t, 0, 2), "application/json")->status ==
        200);
  const auto feed = json_of(cli.Get("/v1/disagreements"));
  REQUIRE(feed["items"].size() == 1);
  const auto s = cli.Post("/v1/resolutions",
                          R"({"tuple_id": ")" + t +
                              R"(", "final_best_index": 0, "final_worst_index": 1})",
                          "application/json");
  CHECK(s->status == 200);
  CHECK(json_of(s)["resolved_by"] == "ann1");
}

TEST_CASE("static mount") {
  testutil::TempDir dir;
  write_file(dir / "index.html", "<html>ui</html>");
  Fixture f;
  LiveServer server(f.service, dir.path());
  auto cli = server.client();
  const auto r = cli.Get("/index.html");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->body == "<html>ui</html>");
  CHECK(cli.Get("/v1/annotators/a/next")->status == 200);
}
