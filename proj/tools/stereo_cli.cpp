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

// `stereo`: command-line front end for the whole pipeline.

#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "stereoscore/analyses.hpp"
#include "stereoscore/annotation_service.hpp"
#include "stereoscore/annotation_store.hpp"
#include "stereoscore/boost.hpp"
#include "stereoscore/corpus.hpp"
#include "stereoscore/error.hpp"
#include "stereoscore/io.hpp"
#include "stereoscore/plackett_luce.hpp"
#include "stereoscore/predictor.hpp"
#include "stereoscore/reliability.hpp"
#include "stereoscore/simulate.hpp"
#include "stereoscore/tuple_sampler.hpp"

namespace fs = std::filesystem;
using namespace stereoscore;

namespace {

// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
  } else {
    write_file(path, content);
  }
}

void note(const nlohmann::json& j) { std::cerr << j.dump() << '\n'; }

ScoreTable load_score_table(const std::string& path) {
  auto imported = import_external_predictions(path);
  if (!imported.clipped_ids.empty()) {
    note({{"warning", "scores outside [-1, 1] were clipped"},
          {"count", imported.clipped_ids.size()}});
  }
  return std::move(imported.table);
}

std::unique_ptr<AnnotationStore> build_store(const std::string& tuples_path,
                            const std::vector<std::string>& annotation_files,
                            const std::string& resolutions_path) {
  auto store = std::make_unique<AnnotationStore>(load_tuples(tuples_path));
  for (const auto& f : annotation_files) {
    for (const auto& a : load_annotations(f)) store->record_annotation(a);
  }
  if (!resolutions_path.empty()) {
    for (const auto& r : load_resolutions(resolutions_path)) store->record_resolution(r);
  }
  return store;
}

struct ScorerArgs {
  double alpha = 0.1;
  std::optional<double> scale;

  void add(CLI::App* app) {
    app->add_option("--alpha", alpha, "prior strength for the uniform regularizer")
        ->capture_default_str();
    app->add_option("--scale", scale, "score scale s (default: P99 - P1 of log strengths)");
  }
  ScorerConfig config() const {
    ScorerConfig c;
    c.ilsr.alpha = alpha;
    c.scale = scale;
    return c;
  }
};

// ---------------------------------------------------------------------------

void add_corpus(CLI::App& app) {
  auto* corpus = app.add_subcommand("corpus", "annotation corpus");
  corpus->require_subcommand(1);
  auto* build = corpus->add_subcommand("build", "select SS/CP sentences and apply removals");
  static std::string ss, cp, removal, out;
  build->add_option("--ss", ss, "StereoSet JSON")->required()->check(CLI::ExistingFile);
  build->add_option("--cp", cp, "CrowS-Pairs CSV")->required()->check(CLI::ExistingFile);
  build->add_option("--removal", removal, "manual removal list")->check(CLI::ExistingFile);
  build->add_option("--out", out, "corpus JSONL")->required();
  build->callback([] {
    const RemovalList rl = removal.empty() ? RemovalList{} : RemovalList::load(removal);
    const auto ss_rows = load_ss_rows(ss);
    const auto cp_rows = load_cp_rows(cp);
    const BuildReport rep = build_corpus(ss_rows, cp_rows, rl);
    validate_annotation_corpus(rep.corpus);
    save_corpus(rep.corpus, out);
    nlohmann::json rejected = nlohmann::json::array();
    for (const auto& r : rep.rejected) rejected.push_back({{"row", r.row_id}, {"reason", r.reason}});
    note({{"sentences", rep.corpus.size()},
          {"ss_selected", rep.ss_selected},
          {"cp_selected", rep.cp_selected},
          {"removed", rep.removed},
          {"unmatched_removals", rep.unmatched_removals},
          {"rejected", rejected.size()}});
  });
}

void add_tuples(CLI::App& app) {
  auto* tuples = app.add_subcommand("tuples", "best-worst tuples");
  tuples->require_subcommand(1);
  auto* sample = tuples->add_subcommand("sample", "balanced quaternion sampling");
  static std::string corpus, out;
  static std::optional<std::size_t> n;
  static std::uint64_t seed = 0;
  sample->add_option("--corpus", corpus)->required()->check(CLI::ExistingFile);
  sample->add_option("--n", n, "number of tuples (default: ceil(2.9567 * sentences))");
  sample->add_option("--seed", seed)->capture_default_str();
  sample->add_option("--out", out)->required();
  sample->callback([] {
    const Corpus c = load_corpus(corpus);
    const std::size_t count =
        n ? *n : static_cast<std::size_t>(std::ceil(static_cast<double>(c.size()) * 8799.0 / 2976.0));
    const auto ts = sample_tuples(c, count, seed);
    save_tuples(ts, out);
    const auto hist = occurrence_histogram(ts);
    std::map<std::size_t, std::size_t> by_count;
    for (const auto& [id, k] : hist) ++by_count[k];
    nlohmann::json h;
    for (const auto& [k, m] : by_count) h[std::to_string(k)] = m;
    note({{"tuples", ts.size()}, {"occurrences", h}});
  });
}

void add_simulate(CLI::App& app) {
  auto* sim = app.add_subcommand("simulate", "scripted annotators");
  sim->require_subcommand(1);
  auto* ann = sim->add_subcommand("annotate", "answer every tuple from planted strengths");
  static std::string corpus, tuples, out, annotator = "sim", mode = "pl", strengths;
  static double divisor = 40.0;
  static std::uint64_t seed = 0;
  ann->add_option("--corpus", corpus)->required()->check(CLI::ExistingFile);
  ann->add_option("--tuples", tuples)->required()->check(CLI::ExistingFile);
  ann->add_option("--annotator", annotator)->capture_default_str();
  ann->add_option("--mode", mode, "noiseless | pl")
      ->check(CLI::IsMember({"noiseless", "pl"}))
      ->capture_default_str();
  ann->add_option("--divisor", divisor, "theta_i proportional to exp(i / divisor), corpus order")
      ->capture_default_str();
  ann->add_option("--strengths", strengths, "scores CSV whose theta column plants the strengths")
      ->check(CLI::ExistingFile);
  ann->add_option("--seed", seed)->capture_default_str();
  ann->add_option("--out", out)->required();
  ann->callback([] {
    const Corpus c = load_corpus(corpus);
    std::unordered_map<std::string, double> w;
    if (!strengths.empty()) {
      for (const auto& e : load_score_table(strengths).entries()) {
        if (!e.theta) throw FormatError(strengths + ": row " + e.id + " has no theta");
        w[e.id] = *e.theta;
      }
    } else {
      const auto theta = exponential_strengths(c.size(), divisor);
      for (std::size_t i = 0; i < c.size(); ++i) w[c[i].id] = theta[i];
    }
    const OracleAnnotator oracle(std::move(w), mode == "noiseless"
                                                   ? OracleAnnotator::Mode::kNoiseless
                                                   : OracleAnnotator::Mode::kPlackettLuce);
    const auto ts = load_tuples(tuples);
    const auto annotations = simulate_annotations(ts, oracle, annotator, seed);
    save_annotations(annotations, out);
    note({{"annotator", annotator}, {"annotations", annotations.size()}});
  });
}

void add_comparisons(CLI::App& app) {
  auto* cmp = app.add_subcommand("comparisons", "pairwise comparisons");
  cmp->require_subcommand(1);
  auto* ex = cmp->add_subcommand("extract", "five pairs per best-worst pick");
  static std::string tuples, resolutions, policy = "resolved", out;
  static std::vector<std::string> annotations;
  ex->add_option("--tuples", tuples)->required()->check(CLI::ExistingFile);
  ex->add_option("--annotations", annotations, "annotation JSONL files")
      ->required()
      ->check(CLI::ExistingFile);
  ex->add_option("--resolutions", resolutions)->check(CLI::ExistingFile);
  ex->add_option("--policy", policy, "resolved | pooled | annotator:<id>")->capture_default_str();
  ex->add_option("--out", out)->required();
  ex->callback([] {
    const auto store = build_store(tuples, annotations, resolutions);
    const auto cs = store->comparisons_for_scoring(ScoringPolicy::parse(policy));
    save_comparisons(cs, out);
    note({{"comparisons", cs.size()}, {"policy", policy}});
  });
}

void add_score(CLI::App& app) {
  auto* score = app.add_subcommand("score", "fit strengths and map them to [-1, 1]");
  static std::string comparisons, corpus, out;
  static ScorerArgs scorer;
  score->add_option("--comparisons", comparisons)->required()->check(CLI::ExistingFile);
  score->add_option("--corpus", corpus, "item universe (default: ids in the comparisons)")
      ->check(CLI::ExistingFile);
  scorer.add(score);
  score->add_option("--out", out)->required();
  score->callback([] {
    const auto cs = load_comparisons(comparisons);
    std::vector<std::string> universe;
    if (!corpus.empty()) {
      for (const auto& s : load_corpus(corpus)) universe.push_back(s.id);
    }
    const ScoreTable table = fit_scores(cs, scorer.config(), universe);
    save_scores(table, out);
    auto j = provenance_to_json(table.provenance());
    j["items"] = table.size();
    note(j);
  });
}

void add_reliability(CLI::App& app) {
  auto* rel = app.add_subcommand("reliability", "inter-annotator and split-half reliability");
  static std::string tuples, resolutions, out, density_out, scores, corpus, group_by = "bias_type";
  static std::vector<std::string> annotations;
  static std::size_t splits = 100;
  static std::uint64_t seed = 0;
  static unsigned threads = 0;
  static ScorerArgs scorer;
  rel->add_option("--tuples", tuples)->check(CLI::ExistingFile);
  rel->add_option("--annotations", annotations)->check(CLI::ExistingFile);
  rel->add_option("--resolutions", resolutions)->check(CLI::ExistingFile);
  rel->add_option("--splits", splits)->capture_default_str();
  rel->add_option("--seed", seed)->capture_default_str();
  rel->add_option("--threads", threads, "0 = all cores")->capture_default_str();
  scorer.add(rel);
  rel->add_option("--out", out, "report JSON (default stdout)");
  rel->add_option("--scores", scores, "scores CSV for density curves")->check(CLI::ExistingFile);
  rel->add_option("--corpus", corpus, "corpus for density grouping")->check(CLI::ExistingFile);
  rel->add_option("--group-by", group_by, "bias_type | source | group_role | all")
      ->capture_default_str();
  rel->add_option("--density-out", density_out, "density CSV");
  rel->callback([] {
    nlohmann::json j = nlohmann::json::object();
    if (!tuples.empty()) {
      if (annotations.empty()) throw ValidationError("--tuples needs --annotations");
      const auto store = build_store(tuples, annotations, resolutions);
      const auto snap = store->snapshot();
      SplitHalfOptions opts;
      opts.n_splits = splits;
      opts.seed = seed;
      opts.scorer = scorer.config();
      opts.threads = threads;
      ReliabilityReport rep = split_half_reliability(*snap, opts);
      if (snap->annotators().size() >= 2) {
        try {
          const auto a = inter_annotator_agreement(*snap, opts.scorer);
          rep.inter_annotator_r = a.r;
          j["agreement"] = {{"annotator_a", a.annotator_a},
                            {"annotator_b", a.annotator_b},
                            {"n_common", a.n_common}};
        } catch (const NumericalError& e) {
          note({{"warning", std::string("inter-annotator agreement: ") + e.what()}});
        }
      }
      j.update(report_to_json(rep));
    }
    if (!density_out.empty()) {
      if (scores.empty() || corpus.empty()) {
        throw ValidationError("--density-out needs --scores and --corpus");
      }
      const auto summary = kernel_density_summary(load_score_table(scores), load_corpus(corpus),
                                                  parse_group_by(group_by), {});
      write_file(density_out, density_to_csv(summary));
      nlohmann::json curves = nlohmann::json::array();
      for (const auto& c : summary.curves) {
        curves.push_back({{"group", c.group}, {"n", c.n}, {"mean", c.mean},
                          {"bandwidth", c.bandwidth}});
      }
      j["density"] = {{"curves", curves}, {"warnings", summary.warnings}};
    }
    if (j.empty()) throw ValidationError("nothing to do: pass --tuples/--annotations or --density-out");
    emit(out, j.dump(2));
  });
}

void add_predict(CLI::App& app) {
  auto* pred = app.add_subcommand("predict", "baseline score regressor");
  pred->require_subcommand(1);
  static std::string corpus, scores, model, out, predictions, split = "test";
  static std::uint64_t seed = 0;
  static TrainConfig train;

  auto* tr = pred->add_subcommand("train", "6:2:2 split, train, report val/test metrics");
  tr->add_option("--corpus", corpus)->required()->check(CLI::ExistingFile);
  tr->add_option("--scores", scores, "gold scores CSV")->required()->check(CLI::ExistingFile);
  tr->add_option("--seed", seed)->capture_default_str();
  tr->add_option("--epochs", train.epochs)->capture_default_str();
  tr->add_option("--lr", train.lr)->capture_default_str();
  tr->add_option("--lambda", train.lambda)->capture_default_str();
  tr->add_option("--model", model, "model JSON")->required();
  tr->add_option("--out", out, "metrics JSON (default stdout)");
  tr->callback([] {
    const auto ds = split_dataset(load_corpus(corpus), load_score_table(scores), {}, seed);
    const auto records = ds.subset(Split::kTrain);
    const auto result = train_baseline(records, train);
    result.model.save(model);
    nlohmann::json j = {{"seed", seed},
                        {"split", {{"train", ds.count(Split::kTrain)},
                                   {"val", ds.count(Split::kVal)},
                                   {"test", ds.count(Split::kTest)}}},
                        {"unscored", ds.unscored.size()},
                        {"final_loss", result.loss_history.back()}};
    for (Split s : {Split::kVal, Split::kTest}) {
      std::vector<ScoreEntry> p, g;
      for (const auto& r : ds.subset(s)) {
        p.push_back({r.sentence.id, result.model.predict(r.sentence.text), std::nullopt});
        g.push_back({r.sentence.id, r.gold, std::nullopt});
      }
      if (!p.empty()) {
        j[std::string(to_string(s))] = metrics_to_json(evaluate(ScoreTable(p), ScoreTable(g)));
      }
    }
    emit(out, j.dump(2));
  });

  auto* ev = pred->add_subcommand("eval", "MSE and Pearson against gold scores");
  ev->add_option("--scores", scores, "gold scores CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--predictions", predictions, "external predictions CSV (id,score)")
      ->check(CLI::ExistingFile);
  ev->add_option("--model", model, "model JSON, applied to the chosen split")
      ->check(CLI::ExistingFile);
  ev->add_option("--corpus", corpus)->check(CLI::ExistingFile);
  ev->add_option("--split", split, "train | val | test | all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}))
      ->capture_default_str();
  ev->add_option("--seed", seed, "split seed used at training time")->capture_default_str();
  ev->add_option("--out", out, "metrics JSON (default stdout)");
  ev->callback([] {
    const ScoreTable gold = load_score_table(scores);
    ScoreTable pred_table;
    if (!predictions.empty()) {
      pred_table = load_score_table(predictions);
    } else {
      if (model.empty() || corpus.empty()) {
        throw ValidationError("pass --predictions, or --model with --corpus");
      }
      const auto m = RegressorModel::load(model);
      const auto ds = split_dataset(load_corpus(corpus), gold, {}, seed);
      std::vector<ScoreEntry> p;
      for (const auto& r : ds.records) {
        if (split != "all" && to_string(r.split) != split) continue;
        p.push_back({r.sentence.id, m.predict(r.sentence.text), std::nullopt});
      }
      pred_table = ScoreTable(std::move(p));
    }
    auto j = metrics_to_json(evaluate(pred_table, gold));
    j["split"] = predictions.empty() ? split : "external";
    emit(out, j.dump(2));
  });

  auto* ap = pred->add_subcommand("apply", "score every sentence of a corpus");
  ap->add_option("--model", model)->required()->check(CLI::ExistingFile);
  ap->add_option("--corpus", corpus)->required()->check(CLI::ExistingFile);
  ap->add_option("--out", out, "scores CSV")->required();
  ap->callback([] {
    const auto table = RegressorModel::load(model).predict(load_corpus(corpus));
    save_scores(table, out);
    note({{"scored", table.size()}});
  });
}

void add_analyze(CLI::App& app) {
  auto* an = app.add_subcommand("analyze", "downstream analyses");
  an->require_subcommand(1);
  static std::string data, format, scores, model, out, scatter, corpus, reference, drop;
  static std::optional<std::size_t> per_class;
  static BootstrapOptions boot;
  static std::uint64_t seed = 0;
  static TrainConfig train;

  auto common = [](CLI::App* c, bool needs_data) {
    auto* d = c->add_option("--data", data, "dataset file")->check(CLI::ExistingFile);
    if (needs_data) d->required();
    c->add_option("--format", format,
                  "ethos-binary | ethos-multilabel | sexism | sst | cp-pairs | generic");
    c->add_option("--scores", scores, "scores CSV joined on id")->check(CLI::ExistingFile);
    c->add_option("--model", model, "regressor JSON applied to the texts")
        ->check(CLI::ExistingFile);
    c->add_option("--out", out, "report JSON (default stdout)");
  };
  auto load = [](DatasetFormat fallback) {
    auto ex = load_examples(data, format.empty() ? fallback : parse_dataset_format(format));
    std::size_t missing = 0;
    if (!scores.empty()) {
      missing = attach_scores(ex, load_score_table(scores)).size();
    } else if (!model.empty()) {
      attach_predictions(ex, RegressorModel::load(model));
    } else if (format != "generic") {
      throw ValidationError("pass --scores or --model to score the examples");
    }
    if (missing) note({{"warning", "examples without a score were dropped"}, {"count", missing}});
    return ex;
  };

  auto* hate = an->add_subcommand("hate", "hate vs non-hate mean scores");
  common(hate, true);
  hate->add_option("--resamples", boot.resamples)->capture_default_str();
  hate->add_option("--seed", boot.seed)->capture_default_str();
  hate->callback([load] {
    const auto ex = load(DatasetFormat::kEthosBinary);
    emit(out, to_json(group_mean_comparison(ex, boot)).dump(2));
  });

  auto* groups = an->add_subcommand("groups", "mean score per target group");
  common(groups, true);
  groups->add_option("--resamples", boot.resamples)->capture_default_str();
  groups->add_option("--seed", boot.seed)->capture_default_str();
  groups->callback([load] {
    const auto ex = load(DatasetFormat::kEthosMultilabel);
    emit(out, to_json(per_group_means(ex, boot), boot).dump(2));
  });

  auto* sexism = an->add_subcommand("sexism", "ranking separability of score vs toxicity");
  common(sexism, true);
  sexism->add_option("--scatter", scatter, "scatter CSV (toxicity vs score)");
  sexism->add_option("--per-class", per_class, "subsample the scatter to N rows per class");
  sexism->add_option("--seed", seed)->capture_default_str();
  sexism->callback([load] {
    const auto ex = load(DatasetFormat::kSexism);
    if (!scatter.empty()) write_file(scatter, scatter_csv(ex, ScatterX::kAuxScore, per_class, seed));
    emit(out, to_json(separability_report(ex)).dump(2));
  });

  auto* senti = an->add_subcommand("sentiment", "mean score per sentiment bucket");
  common(senti, true);
  senti->add_option("--scatter", scatter, "scatter CSV (sentiment vs score)");
  senti->add_option("--per-class", per_class, "subsample the scatter to N rows per bucket");
  senti->add_option("--seed", seed)->capture_default_str();
  senti->callback([load] {
    const auto ex = load(DatasetFormat::kSst);
    if (!scatter.empty()) {
      write_file(scatter, scatter_csv(ex, ScatterX::kContinuous, per_class, seed));
    }
    emit(out, to_json(sentiment_bucket_analysis(ex)).dump(2));
  });

  auto* pairs = an->add_subcommand("pairs", "disadvantaged vs advantaged gap per bias type");
  common(pairs, true);
  pairs->callback([load] {
    const auto ex = load(DatasetFormat::kCpPairs);
    emit(out, to_json(paired_group_gap(ex)).dump(2));
  });

  auto* abl = an->add_subcommand("ablation", "drop one bias type, retrain, correlate");
  abl->add_option("--corpus", corpus, "annotation corpus")->required()->check(CLI::ExistingFile);
  abl->add_option("--scores", scores, "gold scores CSV")->required()->check(CLI::ExistingFile);
  abl->add_option("--drop", drop, "bias type to remove")->required();
  abl->add_option("--data", data, "target dataset (default format cp-pairs)")
      ->required()
      ->check(CLI::ExistingFile);
  abl->add_option("--format", format);
  abl->add_option("--reference", reference,
                  "reference predictions CSV (default: model trained on the full corpus)")
      ->check(CLI::ExistingFile);
  abl->add_option("--seed", seed)->capture_default_str();
  abl->add_option("--epochs", train.epochs)->capture_default_str();
  abl->add_option("--out", out, "report JSON (default stdout)");
  abl->callback([] {
    const Corpus c = load_corpus(corpus);
    const ScoreTable gold = load_score_table(scores);
    const auto target =
        load_examples(data, format.empty() ? DatasetFormat::kCpPairs : parse_dataset_format(format));
    ScoreTable ref;
    if (!reference.empty()) {
      ref = load_score_table(reference);
    } else {
      const auto ds = split_dataset(c, gold, {}, seed);
      const auto m = train_baseline(ds.subset(Split::kTrain), train).model;
      std::vector<ScoreEntry> e;
      for (const auto& ex : target) {
        if (ex.text) e.push_back({ex.id, m.predict(*ex.text), std::nullopt});
      }
      ref = ScoreTable(std::move(e));
    }
    AblationConfig cfg;
    cfg.drop = drop;
    cfg.seed = seed;
    cfg.train = train;
    emit(out, to_json(ablation_run(c, gold, cfg, target, ref)).dump(2));
  });
}

void add_boost(CLI::App& app) {
  auto* b = app.add_subcommand("boost", "embedding vs embedding+score linear classification");
  static std::string embeddings, scores, out;
  static bool hsol = false;
  static BoostOptions opts;
  b->add_option("--embeddings", embeddings, "CSV id,label,v0.. or float32 file with .json sidecar")
      ->required()
      ->check(CLI::ExistingFile);
  b->add_option("--scores", scores)->required()->check(CLI::ExistingFile);
  b->add_option("--runs", opts.n_runs)->capture_default_str();
  b->add_option("--seed", opts.seed)->capture_default_str();
  b->add_option("--epochs", opts.classifier.epochs)->capture_default_str();
  b->add_flag("--hsol", hsol, "labels are HSOL classes; class 0 (hate) is positive");
  b->add_option("--out", out, "report JSON (default stdout)");
  b->callback([] {
    const auto rows = load_embeddings(embeddings, hsol ? LabelScheme::kHsol : LabelScheme::kBinary);
    const auto joined = join_scores(rows, load_score_table(scores));
    if (!joined.missing_scores.empty()) {
      note({{"warning", "rows without a score were dropped"},
            {"count", joined.missing_scores.size()}});
    }
    emit(out, boost_report_to_json(evaluate_boost(joined.examples, opts), opts).dump(2));
  });
}

httplib::Server* g_server = nullptr;

void add_serve(CLI::App& app) {
  auto* s = app.add_subcommand("serve", "annotation HTTP service (/v1)");
  static std::string corpus, tuples, store_dir, static_dir, config, host;
  static std::optional<int> port;
  s->add_option("--corpus", corpus)->required()->check(CLI::ExistingFile);
  s->add_option("--tuples", tuples)->required()->check(CLI::ExistingFile);
  s->add_option("--store", store_dir, "event log directory")->required();
  s->add_option("--config", config, "service config JSON")->check(CLI::ExistingFile);
  s->add_option("--host", host);
  s->add_option("--port", port);
  s->add_option("--static", static_dir, "built UI assets")->check(CLI::ExistingDirectory);
  s->callback([] {
    ServiceConfig cfg = config.empty() ? ServiceConfig{} : load_service_config(config);
    if (!host.empty()) cfg.host = host;
    if (port) cfg.port = *port;
    auto store = AnnotationStore::open(load_tuples(tuples), store_dir);
    AnnotationService service(load_corpus(corpus), *store, cfg);
    httplib::Server server;
    register_routes(server, service,
                    static_dir.empty() ? std::nullopt : std::optional<fs::path>(static_dir));
    g_server = &server;
    std::signal(SIGINT, [](int) {
      if (g_server) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
      if (g_server) g_server->stop();
    });
    note({{"listening", cfg.host + ":" + std::to_string(cfg.port)},
          {"auth", service.auth_enabled()}});
    if (!server.listen(cfg.host, cfg.port)) {
      throw Error("could not listen on " + cfg.host + ":" + std::to_string(cfg.port));
    }
    g_server = nullptr;
  });
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const FormatError*>(&e)) return 2;
  if (dynamic_cast<const NotFoundError*>(&e)) return 3;
  if (dynamic_cast<const ConflictError*>(&e) || dynamic_cast<const PrerequisiteError*>(&e)) {
    return 4;
  }
  if (dynamic_cast<const NumericalError*>(&e)) return 5;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stereoscore: continuous stereotype scores from best-worst judgments", "stereo"};
  app.require_subcommand(1);
  add_corpus(app);
  add_tuples(app);
  add_simulate(app);
  add_comparisons(app);
  add_score(app);
  add_reliability(app);
  add_predict(app);
  add_analyze(app);
  add_boost(app);
  add_serve(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
