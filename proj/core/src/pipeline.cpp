// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "selflabel/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "selflabel/ensemble.hpp"
#include "selflabel/errors.hpp"
#include "selflabel/scoring.hpp"
#include "selflabel/text_io.hpp"

namespace selflabel {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr Modality kModalities[] = {Modality::kAudio, Modality::kVisual};

void read_train_config(const KeyValueConfig& kv, const std::string& prefix, TrainConfig& c) {
  kv.read(prefix + ".batch_size", c.batch_size);
  kv.read(prefix + ".temperature", c.temperature);
  kv.read(prefix + ".epsilon_smooth", c.epsilon_smooth);
  kv.read(prefix + ".learning_rate", c.learning_rate);
  kv.read(prefix + ".epochs", c.epochs);
  kv.read(prefix + ".hidden_dim", c.hidden_dim);
  kv.read(prefix + ".embedding_dim", c.embedding_dim);
  kv.read(prefix + ".augmentation_noise_low", c.augmentation.low);
  kv.read(prefix + ".augmentation_noise_high", c.augmentation.high);
  kv.read(prefix + ".augment_probability", c.augment_probability);
  if (const auto v = kv.get_string(prefix + ".optimizer")) c.optimizer = parse_optimizer(*v);
  if (const auto v = kv.get_string(prefix + ".denominator")) c.denominator = parse_denominator(*v);
}

void write_train_config(std::ostream& out, const std::string& prefix, const TrainConfig& c) {
  out << prefix << ".batch_size = " << c.batch_size << '\n'
      << prefix << ".temperature = " << c.temperature << '\n'
      << prefix << ".epsilon_smooth = " << c.epsilon_smooth << '\n'
      << prefix << ".learning_rate = " << c.learning_rate << '\n'
      << prefix << ".epochs = " << c.epochs << '\n'
      << prefix << ".hidden_dim = " << c.hidden_dim << '\n'
      << prefix << ".embedding_dim = " << c.embedding_dim << '\n'
      << prefix << ".augmentation_noise_low = " << c.augmentation.low << '\n'
      << prefix << ".augmentation_noise_high = " << c.augmentation.high << '\n'
      << prefix << ".augment_probability = " << c.augment_probability << '\n'
      << prefix << ".optimizer = " << to_string(c.optimizer) << '\n'
      << prefix << ".denominator = " << to_string(c.denominator) << '\n';
}

std::string join_counts(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

ordered_json load_json(const fs::path& path) {
  try {
    return ordered_json::parse(read_text_file(path));
  } catch (const ordered_json::parse_error& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const ordered_json& j) { write_text_file(path, j.dump(2) + "\n"); }

KMeansOptions kmeans_options(const ClusterConfig& c, std::size_t restarts, std::uint64_t seed) {
  KMeansOptions o;
  o.restarts = restarts;
  o.max_iters = c.max_iters;
  o.threads = c.threads;
  o.seed = seed;
  return o;
}

Matrix cluster_input(const ClusterConfig& c, const Matrix& z) { return c.normalize ? normalize_rows(z) : z; }

// Runs `body` against a fresh temp directory and renames it to `final_dir`
// on success; the temp directory is removed on failure.
template <class Body>
void write_atomically(const fs::path& final_dir, Body&& body) {
  fs::path tmp = final_dir;
  tmp += ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    body(RoundPaths{tmp});
  } catch (...) {
    std::error_code ignored;
    fs::remove_all(tmp, ignored);
    throw;
  }
  fs::rename(tmp, final_dir);
}

struct FinalModel {
  Modality modality;
  EncoderParams encoder;
};

// Embeds held-out trial and cohort material and writes raw and AS-normed
// score files for every system.
void evaluate_systems(const PipelineContext& ctx, const RoundPaths& paths,
                      const std::vector<FinalModel>& models) {
  std::vector<ScoreSet> raw, normed;
  for (const auto& m : models) {
    const std::string name(to_string(m.modality));
    const Matrix eval_z = round_to_float(embed_rows(m.encoder, feature_matrix(ctx.eval, m.modality)));
    const Matrix cohort_z = round_to_float(embed_rows(m.encoder, feature_matrix(ctx.cohort, m.modality)));
    write_embeddings(eval_z, paths.dir / ("eval_" + name + ".emb"));
    write_embeddings(cohort_z, paths.dir / ("cohort_" + name + ".emb"));

    const EmbeddingTable table(sample_ids(ctx.eval), eval_z);
    write_scores(cosine_score(ctx.trials, table), paths.scores(name, false));
    raw.push_back(read_scores(paths.scores(name, false), ctx.trials));

    write_scores(as_norm(raw.back(), table, Cohort{cohort_z}, ctx.config.eval.top_n),
                 paths.scores(name, true));
    normed.push_back(read_scores(paths.scores(name, true), ctx.trials));
  }
  if (models.size() == 2) {
    write_scores(fuse_scores(raw, ctx.config.eval.fusion_weights), paths.scores("fusion", false));
    write_scores(fuse_scores(normed, ctx.config.eval.fusion_weights), paths.scores("fusion", true));
  }
}

ordered_json system_metrics(const PipelineContext& ctx, const RoundPaths& paths, const std::string& name) {
  ordered_json out;
  for (const bool normalized : {false, true}) {
    const ScoreSet s = read_scores(paths.scores(name, normalized), ctx.trials);
    const EerResult e = eer(s);
    const DcfResult d = min_dcf(s, ctx.config.eval.dcf);
    out[normalized ? "after_score_norm" : "original"] = {
        {"eer", e.eer}, {"eer_threshold", number_or_null(e.threshold)},
        {"min_dcf", d.min_dcf}, {"min_dcf_threshold", number_or_null(d.threshold)}};
  }
  return out;
}

ordered_json training_summary(const fs::path& log_path) {
  std::istringstream in(read_text_file(log_path));
  std::string line, last;
  std::getline(in, line);  // header
  std::size_t epochs = 0;
  while (std::getline(in, line))
    if (!line.empty()) {
      last = line;
      ++epochs;
    }
  ordered_json out{{"epochs", epochs}};
  if (last.empty()) return out;
  std::istringstream fields(last);
  std::string epoch, loss, accuracy;
  std::getline(fields, epoch, '\t');
  std::getline(fields, loss, '\t');
  std::getline(fields, accuracy, '\t');
  out["final_loss"] = std::stod(loss);
  out["final_accuracy"] = accuracy == "nan" ? ordered_json() : ordered_json(std::stod(accuracy));
  return out;
}

std::string report_from_dir(const PipelineContext& ctx, const RoundPaths& paths, std::size_t index) {
  const ordered_json info = load_json(paths.dir / "round_info.json");
  const std::size_t k = info.at("k").get<std::size_t>();
  const auto ids = sample_ids(ctx.corpus);
  const auto truth = ground_truth_labels(ctx.corpus);
  auto label_nmi = [&](const fs::path& p) { return nmi(truth, read_assignment(p, ids, k).labels); };

  ordered_json r;
  r["round"] = index;
  r["k"] = k;
  r["k_source"] = info.at("k_source");
  if (index == 0 && fs::exists(paths.wss_curve())) {
    const WssCurve curve = read_wss_curve(paths.wss_curve());
    const ElbowSelection sel = select_k_elbow(curve);
    r["elbow_k"] = sel.k;
    r["knee_scores"] = sel.knee_scores;
  }

  r["audio_nmi"] = label_nmi(paths.audio_labels());
  if (index > 0) {
    r["visual_nmi"] = label_nmi(paths.visual_labels());
    r["joint_nmi"] = label_nmi(paths.joint_labels());
    r["fused_label_nmi"] = label_nmi(paths.fused_labels());
  }
  r["pseudo_label_nmi"] = label_nmi(paths.labels());

  ordered_json systems;
  systems["audio"] = system_metrics(ctx, paths, "audio");
  if (index > 0) {
    systems["visual"] = system_metrics(ctx, paths, "visual");
    systems["fusion"] = system_metrics(ctx, paths, "fusion");
  }
  r["audio_eer"] = systems["audio"]["original"]["eer"];
  if (index > 0) r["visual_eer"] = systems["visual"]["original"]["eer"];
  r["systems"] = systems;

  ordered_json training;
  training["audio"] = training_summary(paths.audio_log());
  if (index > 0) training["visual"] = training_summary(paths.visual_log());
  r["training"] = training;
  if (index > 0) r["votes"] = load_json(paths.fusion_report());
  return r.dump(2) + "\n";
}

void write_round_info(const RoundPaths& paths, std::size_t index, std::size_t k, const std::string& source) {
  write_json(paths.dir / "round_info.json", ordered_json{{"round", index}, {"k", k}, {"k_source", source}});
}

std::size_t stored_k(const PipelineContext& ctx) {
  return load_json(ctx.round(0).dir / "round_info.json").at("k").get<std::size_t>();
}

void require_complete(const RoundPaths& paths) {
  for (const auto& f : {paths.report(), paths.labels(), paths.dir / "round_info.json"})
    if (!fs::exists(f)) throw DataError("round directory " + paths.dir.string() + " is incomplete (missing " +
                                        f.filename().string() + ")");
}

}  // namespace

fs::path RoundPaths::scores(std::string_view system, bool normalized) const {
  return dir / ("scores_" + std::string(system) + (normalized ? "_asnorm" : "") + ".txt");
}

SynthConfig default_synth_config() { return SynthConfig{}; }

PipelineConfig::PipelineConfig() {
  pretrain.optimizer = OptimizerKind::kAdam;
  pretrain.learning_rate = 0.003;
  pretrain.epochs = 30;
  pretrain.batch_size = 128;
  train.optimizer = OptimizerKind::kSgd;
  train.learning_rate = 0.1;
  train.epochs = 30;
  train.batch_size = 32;
}

void PipelineConfig::validate() const {
  if (!corpus_path) synth.validate();
  pretrain.validate();
  train.validate();
  if (!fixed_k && k_grid.size() < 3) throw ConfigError("k_grid needs at least 3 values when fixed_k is unset");
  for (std::size_t i = 1; i < k_grid.size(); ++i)
    if (k_grid[i] <= k_grid[i - 1]) throw ConfigError("k_grid must be strictly ascending");
  if (fixed_k && *fixed_k < 2) throw ConfigError("fixed_k must be >= 2");
  if (eval.identities < 2) throw ConfigError("eval.identities must be >= 2");
  if (eval.cohort_size < 2) throw ConfigError("eval.cohort_size must be >= 2");
  if (eval.top_n < 2 || eval.top_n > eval.cohort_size)
    throw ConfigError("eval.top_n must lie in [2, eval.cohort_size]");
  if (eval.target_trials == 0 || eval.nontarget_trials == 0)
    throw ConfigError("eval needs target and nontarget trials");
  if (eval.groups_per_identity * eval.segments_per_group < 2)
    throw ConfigError("eval identities need at least 2 samples for target trials");
  if (eval.fusion_weights.size() != 2) throw ConfigError("eval.fusion_weights needs two values");
  if (std::abs(eval.fusion_weights[0] + eval.fusion_weights[1] - 1.0) > 1e-9 ||
      eval.fusion_weights[0] < 0.0 || eval.fusion_weights[1] < 0.0)
    throw ConfigError("eval.fusion_weights must be non-negative and sum to 1");
  eval.dcf.validate();
  if (cluster.restarts == 0 || cluster.sweep_restarts == 0 || cluster.max_iters == 0)
    throw ConfigError("cluster restarts and max_iters must be >= 1");
}

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& kv) {
  PipelineConfig c;
  if (const auto v = kv.get_string("corpus")) c.corpus_path = *v;
  apply_config(kv, "synth", c.synth);
  if (const auto v = kv.get_u64("seed")) c.seed = *v;
  kv.read("rounds", c.rounds);
  if (const auto v = kv.get_counts("k_grid")) c.k_grid = *v;
  if (const auto v = kv.get_int("fixed_k")) {
    if (*v < 0) throw ConfigError("fixed_k must be >= 0");
    if (*v > 0) c.fixed_k = static_cast<std::size_t>(*v);
  }
  read_train_config(kv, "pretrain", c.pretrain);
  read_train_config(kv, "train", c.train);
  kv.read("cluster.restarts", c.cluster.restarts);
  kv.read("cluster.sweep_restarts", c.cluster.sweep_restarts);
  kv.read("cluster.max_iters", c.cluster.max_iters);
  kv.read("cluster.threads", c.cluster.threads);
  kv.read("cluster.normalize", c.cluster.normalize);
  kv.read("eval.identities", c.eval.identities);
  kv.read("eval.groups_per_identity", c.eval.groups_per_identity);
  kv.read("eval.segments_per_group", c.eval.segments_per_group);
  kv.read("eval.target_trials", c.eval.target_trials);
  kv.read("eval.nontarget_trials", c.eval.nontarget_trials);
  kv.read("eval.cohort_size", c.eval.cohort_size);
  kv.read("eval.top_n", c.eval.top_n);
  kv.read("eval.p_target", c.eval.dcf.p_target);
  kv.read("eval.c_miss", c.eval.dcf.c_miss);
  kv.read("eval.c_fa", c.eval.dcf.c_fa);
  kv.read("eval.fusion_weight_audio", c.eval.fusion_weights[0]);
  kv.read("eval.fusion_weight_visual", c.eval.fusion_weights[1]);
  kv.read("use_group_consolidation", c.use_group_consolidation);
  if (const auto v = kv.get_string("output_dir")) c.output_dir = *v;

  if (const auto unused = kv.unused_keys(); !unused.empty()) {
    std::string msg = "unknown config key(s):";
    for (const auto& k : unused) msg += " " + k;
    throw ConfigError(msg);
  }
  return c;
}

std::string PipelineConfig::to_text(bool for_fingerprint) const {
  std::ostringstream out;
  out.precision(17);
  if (corpus_path) out << "corpus = " << corpus_path->string() << '\n';
  out << "seed = " << seed << '\n';
  if (!for_fingerprint) out << "rounds = " << rounds << '\n';
  SynthConfig s = synth;
  s.seed = seed;
  out << to_config_text(s, "synth");
  out << "k_grid = " << join_counts(k_grid) << '\n';
  out << "fixed_k = " << (fixed_k ? *fixed_k : 0) << '\n';
  write_train_config(out, "pretrain", pretrain);
  write_train_config(out, "train", train);
  out << "cluster.restarts = " << cluster.restarts << '\n'
      << "cluster.sweep_restarts = " << cluster.sweep_restarts << '\n'
      << "cluster.max_iters = " << cluster.max_iters << '\n'
      << "cluster.normalize = " << (cluster.normalize ? "true" : "false") << '\n'
      << "eval.identities = " << eval.identities << '\n'
      << "eval.groups_per_identity = " << eval.groups_per_identity << '\n'
      << "eval.segments_per_group = " << eval.segments_per_group << '\n'
      << "eval.target_trials = " << eval.target_trials << '\n'
      << "eval.nontarget_trials = " << eval.nontarget_trials << '\n'
      << "eval.cohort_size = " << eval.cohort_size << '\n'
      << "eval.top_n = " << eval.top_n << '\n'
      << "eval.p_target = " << eval.dcf.p_target << '\n'
      << "eval.c_miss = " << eval.dcf.c_miss << '\n'
      << "eval.c_fa = " << eval.dcf.c_fa << '\n'
      << "eval.fusion_weight_audio = " << eval.fusion_weights[0] << '\n'
      << "eval.fusion_weight_visual = " << eval.fusion_weights[1] << '\n'
      << "use_group_consolidation = " << (use_group_consolidation ? "true" : "false") << '\n';
  if (!for_fingerprint) {
    out << "cluster.threads = " << cluster.threads << '\n';
    out << "output_dir = " << output_dir.string() << '\n';
  }
  return out.str();
}

std::uint64_t pretrain_seed(std::uint64_t master) { return derive_seed(master, 10); }

std::uint64_t round_train_seed(std::uint64_t master, std::size_t round, Modality m) {
  return derive_seed(master, 100 + 2 * round + (m == Modality::kVisual ? 1 : 0));
}

std::uint64_t round_cluster_seed(std::uint64_t master, std::size_t round) {
  return derive_seed(master, 1000 + round);
}

std::vector<Trial> make_trials(const MultiModalCorpus& eval, std::size_t targets, std::size_t nontargets,
                               std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_identity;
  for (std::size_t i = 0; i < eval.size(); ++i) by_identity[eval.samples[i].identity_gt].push_back(i);
  std::vector<int> identities;
  for (const auto& [id, members] : by_identity)
    if (members.size() >= 2) identities.push_back(id);
  if (identities.empty() || by_identity.size() < 2)
    throw ConfigError("held-out corpus cannot produce both target and nontarget trials");

  Rng rng(seed);
  std::vector<Trial> trials;
  trials.reserve(targets + nontargets);
  for (std::size_t t = 0; t < targets; ++t) {
    const auto& members = by_identity[identities[rng.below(identities.size())]];
    const std::size_t a = rng.below(members.size());
    std::size_t b = rng.below(members.size() - 1);
    if (b >= a) ++b;
    trials.push_back({eval.samples[members[a]].sample_id, eval.samples[members[b]].sample_id, true});
  }
  for (std::size_t t = 0; t < nontargets; ++t) {
    std::size_t a = 0, b = 0;
    do {
      a = rng.below(eval.size());
      b = rng.below(eval.size());
    } while (eval.samples[a].identity_gt == eval.samples[b].identity_gt);
    trials.push_back({eval.samples[a].sample_id, eval.samples[b].sample_id, false});
  }
  return trials;
}

PipelineContext prepare_pipeline(const PipelineConfig& config) {
  config.validate();
  PipelineContext ctx;
  ctx.config = config;
  ctx.config.synth.seed = config.seed;
  ctx.root = config.output_dir;
  fs::create_directories(ctx.root);

  const std::string fingerprint = config.to_text(true);
  const fs::path fingerprint_path = ctx.root / "fingerprint.txt";
  if (fs::exists(fingerprint_path) && read_text_file(fingerprint_path) != fingerprint)
    throw ConfigError("output directory " + ctx.root.string() +
                      " holds a run made with a different configuration");
  write_text_file(fingerprint_path, fingerprint);
  write_text_file(ctx.root / "config.txt", config.to_text());

  SynthConfig world = ctx.config.synth;
  if (config.corpus_path) {
    ctx.corpus = read_corpus(*config.corpus_path);
    if (fs::exists(*config.corpus_path / "synth.cfg")) world = ctx.corpus.config;
  } else {
    const fs::path corpus_dir = ctx.root / "corpus";
    if (!fs::exists(corpus_dir / "meta.tsv")) write_corpus(generate_corpus(world), corpus_dir);
    ctx.corpus = read_corpus(corpus_dir);
  }
  if (ctx.corpus.size() == 0) throw DataError("training corpus is empty");

  const EvalConfig& e = config.eval;
  ctx.eval = generate_heldout_corpus(world, e.identities, e.groups_per_identity, e.segments_per_group, 1,
                                     "eval-");
  ctx.cohort = generate_heldout_corpus(world, e.cohort_size, 1, 1, 2, "cohort-");
  ctx.trials = make_trials(ctx.eval, e.target_trials, e.nontarget_trials, derive_seed(config.seed, 20));
  if (!fs::exists(ctx.root / "eval" / "meta.tsv")) write_corpus(ctx.eval, ctx.root / "eval");
  if (!fs::exists(ctx.root / "cohort" / "meta.tsv")) write_corpus(ctx.cohort, ctx.root / "cohort");
  write_trials(ctx.trials, ctx.root / "trials.txt");
  return ctx;
}

RoundPaths run_stage1(const PipelineContext& ctx) {
  const PipelineConfig& c = ctx.config;
  const RoundPaths final_paths = ctx.round(0);
  write_atomically(final_paths.dir, [&](const RoundPaths& paths) {
    const Matrix x = feature_matrix(ctx.corpus, Modality::kAudio);
    TrainConfig pre = c.pretrain;
    pre.seed = pretrain_seed(c.seed);
    const ContrastiveResult trained = train_contrastive(x, pre);
    write_checkpoint({trained.encoder, std::nullopt}, paths.audio_encoder());
    write_training_log(trained.log, paths.audio_log());

    const Matrix z = round_to_float(embed_rows(trained.encoder, x));
    write_embeddings(z, paths.audio_embeddings());
    const Matrix zc = cluster_input(c.cluster, z);

    std::size_t k = 0;
    std::string source;
    if (c.fixed_k) {
      k = *c.fixed_k;
      source = "fixed";
    } else {
      const WssCurve curve =
          sweep_k(zc, c.k_grid, kmeans_options(c.cluster, c.cluster.sweep_restarts, round_cluster_seed(c.seed, 0)));
      write_wss_curve(curve, paths.wss_curve());
      k = select_k_elbow(curve).k;
      source = "elbow";
    }
    write_round_info(paths, 0, k, source);

    const Assignment labels =
        kmeans(zc, k, kmeans_options(c.cluster, c.cluster.restarts, derive_seed(round_cluster_seed(c.seed, 0), 1)))
            .assignment;
    const auto ids = sample_ids(ctx.corpus);
    write_assignment(ids, labels, paths.audio_labels());
    write_assignment(ids, labels, paths.labels());

    evaluate_systems(ctx, paths, {{Modality::kAudio, trained.encoder}});
    write_text_file(paths.report(), report_from_dir(ctx, paths, 0));
  });
  return final_paths;
}

RoundPaths run_round(const PipelineContext& ctx, std::size_t index) {
  if (index == 0) throw ArgumentError("round 0 is produced by run_stage1");
  const PipelineConfig& c = ctx.config;
  const RoundPaths previous = ctx.round(index - 1);
  require_complete(previous);
  const std::size_t k = stored_k(ctx);
  const auto ids = sample_ids(ctx.corpus);
  const Assignment pseudo = read_assignment(previous.labels(), ids, k);

  const RoundPaths final_paths = ctx.round(index);
  write_atomically(final_paths.dir, [&](const RoundPaths& paths) {
    std::vector<FinalModel> models;
    Matrix embeddings[2];
    for (const Modality m : kModalities) {
      const Matrix x = feature_matrix(ctx.corpus, m);
      TrainConfig tc = c.train;
      tc.seed = round_train_seed(c.seed, index, m);
      const ClassifierResult trained = train_classifier(x, pseudo, tc);
      const bool audio = m == Modality::kAudio;
      write_checkpoint({trained.encoder, trained.head}, audio ? paths.audio_encoder() : paths.visual_encoder());
      write_training_log(trained.log, audio ? paths.audio_log() : paths.visual_log());
      embeddings[audio ? 0 : 1] = round_to_float(embed_rows(trained.encoder, x));
      write_embeddings(embeddings[audio ? 0 : 1], audio ? paths.audio_embeddings() : paths.visual_embeddings());
      models.push_back({m, trained.encoder});
    }
    write_round_info(paths, index, k, load_json(ctx.round(0).dir / "round_info.json").at("k_source"));

    const FusionResult fusion =
        fuse_pseudo_labels(cluster_input(c.cluster, embeddings[0]), cluster_input(c.cluster, embeddings[1]), k,
                           kmeans_options(c.cluster, c.cluster.restarts, round_cluster_seed(c.seed, index)));
    write_assignment(ids, fusion.audio, paths.audio_labels());
    write_assignment(ids, fusion.visual, paths.visual_labels());
    write_assignment(ids, fusion.joint, paths.joint_labels());
    write_assignment(ids, fusion.fused, paths.fused_labels());
    const Assignment next =
        c.use_group_consolidation ? consolidate_groups(fusion.fused, group_ids(ctx.corpus)) : fusion.fused;
    write_assignment(ids, next, paths.labels());
    write_json(paths.fusion_report(), ordered_json{{"unanimous", fusion.votes.unanimous},
                                                   {"two_of_three", fusion.votes.majority},
                                                   {"all_distinct", fusion.votes.all_distinct},
                                                   {"audio_objective", fusion.audio_to_joint.objective},
                                                   {"visual_objective", fusion.visual_to_joint.objective},
                                                   {"group_consolidation", c.use_group_consolidation}});

    evaluate_systems(ctx, paths, models);
    write_text_file(paths.report(), report_from_dir(ctx, paths, index));
  });
  return final_paths;
}

std::string compute_round_report(const PipelineContext& ctx, std::size_t index) {
  const RoundPaths paths = ctx.round(index);
  require_complete(paths);
  return report_from_dir(ctx, paths, index);
}

std::string compute_final_report(const PipelineContext& ctx) {
  const std::size_t rounds = ctx.config.rounds;
  ordered_json series;
  series["rounds"] = rounds;
  ordered_json round_idx = ordered_json::array(), audio_nmi = ordered_json::array(),
               audio_eer = ordered_json::array(), visual_nmi = ordered_json::array(),
               visual_eer = ordered_json::array(), fused_nmi = ordered_json::array();
  ordered_json last;
  for (std::size_t r = 0; r <= rounds; ++r) {
    const RoundPaths paths = ctx.round(r);
    require_complete(paths);
    last = load_json(paths.report());
    round_idx.push_back(r);
    audio_nmi.push_back(last.at("audio_nmi"));
    audio_eer.push_back(last.at("audio_eer"));
    visual_nmi.push_back(last.value("visual_nmi", ordered_json()));
    visual_eer.push_back(last.value("visual_eer", ordered_json()));
    fused_nmi.push_back(last.value("fused_label_nmi", ordered_json()));
  }
  series["k"] = last.at("k");
  series["round"] = round_idx;
  series["audio_nmi"] = audio_nmi;
  series["audio_eer"] = audio_eer;
  series["visual_nmi"] = visual_nmi;
  series["visual_eer"] = visual_eer;
  series["fused_label_nmi"] = fused_nmi;
  series["final_systems"] = last.at("systems");
  return series.dump(2) + "\n";
}

std::string run_pipeline(const PipelineConfig& config, const PipelineOptions& options) {
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };
  const PipelineContext ctx = prepare_pipeline(config);
  log("corpus: " + std::to_string(ctx.corpus.size()) + " samples, " + std::to_string(ctx.trials.size()) +
      " trials");

  for (std::size_t r = 0; r <= config.rounds; ++r) {
    const RoundPaths paths = ctx.round(r);
    if (fs::exists(paths.dir)) {
      require_complete(paths);
      log("round " + std::to_string(r) + ": reusing " + paths.dir.string());
    } else {
      if (r == 0)
        run_stage1(ctx);
      else
        run_round(ctx, r);
      const ordered_json report = load_json(paths.report());
      std::ostringstream msg;
      msg << "round " << r << ": K=" << report.at("k") << " audio NMI=" << report.at("audio_nmi")
          << " audio EER=" << report.at("audio_eer");
      if (r > 0)
        msg << " visual NMI=" << report.at("visual_nmi") << " fused NMI=" << report.at("fused_label_nmi");
      log(msg.str());
    }
    if (options.stop_after_round && r >= *options.stop_after_round) return {};
  }
  const std::string final_report = compute_final_report(ctx);
  write_text_file(ctx.root / "final_report.json", final_report);
  return final_report;
}

}  // namespace selflabel
