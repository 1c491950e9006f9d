// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

// Command-line front end. Every subcommand reads the same key = value
// config file as `pipeline`, so a subcommand run with the same config and
// seed reproduces the corresponding pipeline artifact.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "selflabel/clustering.hpp"
#include "selflabel/config.hpp"
#include "selflabel/encoder.hpp"
#include "selflabel/ensemble.hpp"
#include "selflabel/errors.hpp"
#include "selflabel/metrics.hpp"
#include "selflabel/pipeline.hpp"
#include "selflabel/scoring.hpp"
#include "selflabel/synthdata.hpp"
#include "selflabel/text_io.hpp"

namespace fs = std::filesystem;
using namespace selflabel;
using nlohmann::ordered_json;

namespace {

enum ExitCode : int { kOk = 0, kConfig = 2, kData = 3, kNumeric = 4 };

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

PipelineConfig load_config(const Globals& g, const fs::path& fallback = {}) {
  KeyValueConfig kv;
  if (!g.config.empty())
    kv = KeyValueConfig::load(g.config);
  else if (!fallback.empty() && fs::exists(fallback))
    kv = KeyValueConfig::load(fallback);
  PipelineConfig c = PipelineConfig::from_config(kv);
  if (g.seed) c.seed = *g.seed;
  if (!g.out.empty()) c.output_dir = g.out;
  return c;
}

fs::path require_out(const Globals& g) {
  if (g.out.empty()) throw ArgumentError("--out is required");
  return g.out;
}

KMeansOptions kmeans_options(const ClusterConfig& c, std::size_t restarts, std::uint64_t seed) {
  KMeansOptions o;
  o.restarts = restarts;
  o.max_iters = c.max_iters;
  o.threads = c.threads;
  o.seed = seed;
  return o;
}

void print_json(const ordered_json& j) { std::cout << j.dump(2) << '\n'; }

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string heldout;
};

void cmd_generate(const Globals& g, const GenerateArgs& a) {
  const PipelineConfig c = load_config(g);
  SynthConfig s = c.synth;
  s.seed = c.seed;
  const fs::path out = require_out(g);
  const MultiModalCorpus corpus = generate_corpus(s);
  write_corpus(corpus, out);
  std::cerr << "wrote " << corpus.size() << " samples to " << out << '\n';
  if (a.heldout.empty()) return;
  const EvalConfig& e = c.eval;
  const fs::path dir = a.heldout;
  const auto eval = generate_heldout_corpus(s, e.identities, e.groups_per_identity, e.segments_per_group, 1, "eval-");
  const auto cohort = generate_heldout_corpus(s, e.cohort_size, 1, 1, 2, "cohort-");
  write_corpus(eval, dir / "eval");
  write_corpus(cohort, dir / "cohort");
  write_trials(make_trials(eval, e.target_trials, e.nontarget_trials, derive_seed(c.seed, 20)), dir / "trials.txt");
  std::cerr << "wrote held-out material to " << dir << '\n';
}

// --- pretrain / train -------------------------------------------------------

struct TrainArgs {
  std::string corpus;
  std::string modality = "audio";
  std::string labels;
  std::size_t k = 0;
  std::size_t round = 1;
};

void write_trained(const fs::path& out, const EncoderParams& encoder, const std::optional<ClassifierHead>& head,
                   const std::vector<EpochLog>& log, const Matrix& x) {
  fs::create_directories(out);
  write_checkpoint({encoder, head}, out / "encoder.enc");
  write_training_log(log, out / "train.tsv");
  write_embeddings(round_to_float(embed_rows(encoder, x)), out / "embeddings.emb");
  std::cerr << "wrote encoder.enc, train.tsv and embeddings.emb to " << out << '\n';
}

void cmd_pretrain(const Globals& g, const TrainArgs& a) {
  const PipelineConfig c = load_config(g);
  const MultiModalCorpus corpus = read_corpus(a.corpus);
  const Matrix x = feature_matrix(corpus, parse_modality(a.modality));
  TrainConfig tc = c.pretrain;
  tc.seed = pretrain_seed(c.seed);
  const ContrastiveResult r = train_contrastive(x, tc);
  write_trained(require_out(g), r.encoder, std::nullopt, r.log, x);
}

void cmd_train(const Globals& g, const TrainArgs& a) {
  const PipelineConfig c = load_config(g);
  const MultiModalCorpus corpus = read_corpus(a.corpus);
  const Modality m = parse_modality(a.modality);
  const Matrix x = feature_matrix(corpus, m);
  const Assignment labels =
      read_assignment(a.labels, sample_ids(corpus), a.k ? std::optional<std::size_t>(a.k) : std::nullopt);
  TrainConfig tc = c.train;
  tc.seed = round_train_seed(c.seed, a.round, m);
  const ClassifierResult r = train_classifier(x, labels, tc);
  write_trained(require_out(g), r.encoder, r.head, r.log, x);
}

// --- cluster ------------------------------------------------------------------

struct ClusterArgs {
  std::string corpus;
  std::string embeddings;
  std::size_t k = 0;
  std::size_t round = 0;
};

void cmd_cluster(const Globals& g, const ClusterArgs& a) {
  const PipelineConfig c = load_config(g);
  const auto ids = sample_ids(read_corpus(a.corpus));
  Matrix z = read_embeddings(a.embeddings);
  if (z.rows() != ids.size()) throw ConsistencyError("embedding rows do not match corpus size");
  if (c.cluster.normalize) z = normalize_rows(std::move(z));
  const fs::path out = require_out(g);
  fs::create_directories(out);

  const std::uint64_t seed = round_cluster_seed(c.seed, a.round);
  std::size_t k = a.k ? a.k : c.fixed_k.value_or(0);
  if (k == 0) {
    const WssCurve curve = sweep_k(z, c.k_grid, kmeans_options(c.cluster, c.cluster.sweep_restarts, seed));
    write_wss_curve(curve, out / "wss_curve.tsv");
    const ElbowSelection sel = select_k_elbow(curve);
    std::cout << "K\tW\tknee\n";
    for (std::size_t i = 0; i < curve.ks.size(); ++i)
      std::cout << curve.ks[i] << '\t' << curve.wss[i] << '\t' << sel.knee_scores[i] << '\n';
    k = sel.k;
    std::cout << "selected K = " << k << " (set fixed_k to override)\n";
  }
  const KMeansResult r = kmeans(z, k, kmeans_options(c.cluster, c.cluster.restarts, derive_seed(seed, 1)));
  write_assignment(ids, r.assignment, out / "labels.tsv");
  std::cerr << "K=" << k << " W=" << r.wss << " labels written to " << out / "labels.tsv" << '\n';
}

// --- fuse ---------------------------------------------------------------------

struct FuseArgs {
  std::string corpus;
  std::string audio;
  std::string visual;
  std::size_t k = 0;
  std::size_t round = 1;
  bool group_consolidation = false;
};

void cmd_fuse(const Globals& g, const FuseArgs& a) {
  const PipelineConfig c = load_config(g);
  const MultiModalCorpus corpus = read_corpus(a.corpus);
  const auto ids = sample_ids(corpus);
  Matrix za = read_embeddings(a.audio), zv = read_embeddings(a.visual);
  if (za.rows() != ids.size() || zv.rows() != ids.size())
    throw ConsistencyError("embedding rows do not match corpus size");
  if (c.cluster.normalize) {
    za = normalize_rows(std::move(za));
    zv = normalize_rows(std::move(zv));
  }
  const std::size_t k = a.k ? a.k : c.fixed_k.value_or(0);
  if (k < 2) throw ArgumentError("fuse needs --k (or fixed_k) >= 2");
  const FusionResult f =
      fuse_pseudo_labels(za, zv, k, kmeans_options(c.cluster, c.cluster.restarts, round_cluster_seed(c.seed, a.round)));
  const fs::path out = require_out(g);
  fs::create_directories(out);
  write_assignment(ids, f.audio, out / "audio_labels.tsv");
  write_assignment(ids, f.visual, out / "visual_labels.tsv");
  write_assignment(ids, f.joint, out / "joint_labels.tsv");
  write_assignment(ids, f.fused, out / "fused_labels.tsv");
  const bool consolidate = a.group_consolidation || c.use_group_consolidation;
  write_assignment(ids, consolidate ? consolidate_groups(f.fused, group_ids(corpus)) : f.fused, out / "labels.tsv");
  const ordered_json report{{"unanimous", f.votes.unanimous},
                            {"two_of_three", f.votes.majority},
                            {"all_distinct", f.votes.all_distinct},
                            {"audio_objective", f.audio_to_joint.objective},
                            {"visual_objective", f.visual_to_joint.objective},
                            {"group_consolidation", consolidate}};
  write_text_file(out / "fusion_report.json", report.dump(2) + "\n");
  print_json(report);
}

// --- score --------------------------------------------------------------------

struct ScoreArgs {
  std::string trials;
  std::string ids;
  std::vector<std::string> embeddings;
  std::vector<std::string> cohort;
  std::size_t top_n = 0;
  std::vector<double> weights;
};

void cmd_score(const Globals& g, const ScoreArgs& a) {
  const PipelineConfig c = load_config(g);
  const auto trials = read_trials(a.trials);
  const auto ids = sample_ids(read_corpus(a.ids));
  if (!a.cohort.empty() && a.cohort.size() != a.embeddings.size())
    throw ArgumentError("give one --cohort file per --embeddings file");
  std::vector<double> weights = a.weights;
  if (weights.empty()) weights.assign(a.embeddings.size(), 1.0 / static_cast<double>(a.embeddings.size()));
  if (weights.size() != a.embeddings.size()) throw ArgumentError("--weights needs one value per --embeddings file");
  const std::size_t top_n = a.top_n ? a.top_n : c.eval.top_n;

  std::vector<ScoreSet> systems;
  for (std::size_t i = 0; i < a.embeddings.size(); ++i) {
    const EmbeddingTable table(ids, read_embeddings(a.embeddings[i]));
    ScoreSet s = cosine_score(trials, table);
    if (!a.cohort.empty()) s = as_norm(s, table, Cohort{read_embeddings(a.cohort[i])}, top_n);
    systems.push_back(std::move(s));
  }
  const ScoreSet fused = systems.size() == 1 ? systems.front() : fuse_scores(systems, weights);
  const fs::path out = require_out(g);
  write_scores(fused, out);
  std::cerr << "wrote " << fused.scores.size() << " scores to " << out << '\n';
}

// --- metrics ------------------------------------------------------------------

struct MetricsArgs {
  std::string corpus;
  std::string audio_labels;
  std::string visual_labels;
  std::string fused_labels;
  std::string scores;
  std::string trials;
};

void cmd_metrics(const Globals& g, const MetricsArgs& a) {
  const PipelineConfig c = load_config(g);
  ordered_json j{{"nmi_audio", nullptr}, {"nmi_visual", nullptr}, {"nmi_fused", nullptr},
                 {"eer", nullptr},       {"min_dcf", nullptr},    {"threshold", nullptr}};
  if (!a.corpus.empty()) {
    const MultiModalCorpus corpus = read_corpus(a.corpus);
    const auto ids = sample_ids(corpus);
    const auto truth = ground_truth_labels(corpus);
    auto label_nmi = [&](const std::string& p) { return nmi(truth, read_assignment(p, ids, std::nullopt).labels); };
    if (!a.audio_labels.empty()) j["nmi_audio"] = label_nmi(a.audio_labels);
    if (!a.visual_labels.empty()) j["nmi_visual"] = label_nmi(a.visual_labels);
    if (!a.fused_labels.empty()) j["nmi_fused"] = label_nmi(a.fused_labels);
  }
  if (!a.scores.empty()) {
    if (a.trials.empty()) throw ArgumentError("--scores needs --trials");
    const ScoreSet s = read_scores(a.scores, read_trials(a.trials));
    const EerResult e = eer(s);
    j["eer"] = e.eer;
    j["min_dcf"] = min_dcf(s, c.eval.dcf).min_dcf;
    if (std::isfinite(e.threshold)) j["threshold"] = e.threshold;
  }
  if (!g.out.empty()) write_text_file(g.out, j.dump(2) + "\n");
  print_json(j);
}

// --- pipeline / report --------------------------------------------------------

struct PipelineArgs {
  std::optional<std::size_t> rounds;
  std::optional<std::size_t> stop_after;
};

void cmd_pipeline(const Globals& g, const PipelineArgs& a) {
  PipelineConfig c = load_config(g);
  if (a.rounds) c.rounds = *a.rounds;
  PipelineOptions opts;
  opts.stop_after_round = a.stop_after;
  opts.log = [](const std::string& msg) { std::cerr << msg << '\n'; };
  const std::string report = run_pipeline(c, opts);
  if (!report.empty()) std::cout << report;
}

struct ReportArgs {
  bool check = false;
};

int cmd_report(const Globals& g, const ReportArgs& a) {
  const fs::path dir = require_out(g);
  if (!fs::exists(dir / "config.txt")) throw DataError(dir.string() + " holds no pipeline run");
  const PipelineContext ctx = prepare_pipeline(load_config(g, dir / "config.txt"));
  int status = kOk;
  if (a.check) {
    for (std::size_t r = 0; r <= ctx.config.rounds; ++r) {
      const RoundPaths paths = ctx.round(r);
      if (!fs::exists(paths.dir)) break;
      const bool same = compute_round_report(ctx, r) == read_text_file(paths.report());
      std::cerr << "round " << r << ": " << (same ? "report reproduced" : "REPORT MISMATCH") << '\n';
      if (!same) status = kData;
    }
  }
  std::cout << compute_final_report(ctx);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selflabel: iterative pseudo-labeling for multi-modal representation learning"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "key = value config file");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "output path");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write a synthetic corpus");
  generate->add_option("--heldout", gen.heldout, "also write eval/cohort corpora and trials here");

  TrainArgs pre;
  auto* pretrain = app.add_subcommand("pretrain", "contrastive pretraining of one encoder");
  pretrain->add_option("--corpus", pre.corpus)->required();
  pretrain->add_option("--modality", pre.modality);

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "pseudo-label classifier training of one encoder");
  train->add_option("--corpus", tr.corpus)->required();
  train->add_option("--labels", tr.labels, "assignment TSV")->required();
  train->add_option("--k", tr.k, "number of classes (default: max label + 1)");
  train->add_option("--modality", tr.modality);
  train->add_option("--round", tr.round, "round index used for seeding");

  ClusterArgs cl;
  auto* cluster = app.add_subcommand("cluster", "k-means with elbow K selection");
  cluster->add_option("--corpus", cl.corpus, "corpus whose ids label the rows")->required();
  cluster->add_option("--embeddings", cl.embeddings)->required();
  cluster->add_option("--k", cl.k, "skip the sweep and use this K");
  cluster->add_option("--round", cl.round, "round index used for seeding");

  FuseArgs fu;
  auto* fuse = app.add_subcommand("fuse", "cluster both modalities and the joint space, then vote");
  fuse->add_option("--corpus", fu.corpus)->required();
  fuse->add_option("--audio", fu.audio, "audio embeddings")->required();
  fuse->add_option("--visual", fu.visual, "visual embeddings")->required();
  fuse->add_option("--k", fu.k);
  fuse->add_option("--round", fu.round, "round index used for seeding");
  fuse->add_flag("--group-consolidation", fu.group_consolidation);

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "cosine scoring with optional AS-Norm and fusion");
  score->add_option("--trials", sc.trials)->required();
  score->add_option("--ids", sc.ids, "corpus whose ids label the embedding rows")->required();
  score->add_option("--embeddings", sc.embeddings)->required();
  score->add_option("--cohort", sc.cohort, "cohort embeddings; enables AS-Norm");
  score->add_option("--top-n", sc.top_n);
  score->add_option("--weights", sc.weights)->delimiter(',');

  MetricsArgs me;
  auto* metrics = app.add_subcommand("metrics", "NMI, EER and minDCF as JSON");
  metrics->add_option("--corpus", me.corpus, "corpus holding the reference identities");
  metrics->add_option("--audio-labels", me.audio_labels);
  metrics->add_option("--visual-labels", me.visual_labels);
  metrics->add_option("--fused-labels", me.fused_labels);
  metrics->add_option("--scores", me.scores);
  metrics->add_option("--trials", me.trials);

  PipelineArgs pa;
  auto* pipeline = app.add_subcommand("pipeline", "run or resume the full iterative pipeline");
  pipeline->add_option("--rounds", pa.rounds);
  pipeline->add_option("--stop-after", pa.stop_after, "stop after this round");

  ReportArgs re;
  auto* report = app.add_subcommand("report", "rebuild the final report of a run directory");
  report->add_flag("--check", re.check, "recompute every round report and compare");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*generate) cmd_generate(g, gen);
    if (*pretrain) cmd_pretrain(g, pre);
    if (*train) cmd_train(g, tr);
    if (*cluster) cmd_cluster(g, cl);
    if (*fuse) cmd_fuse(g, fu);
    if (*score) cmd_score(g, sc);
    if (*metrics) cmd_metrics(g, me);
    if (*pipeline) cmd_pipeline(g, pa);
    if (*report) return cmd_report(g, re);
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  }
}
