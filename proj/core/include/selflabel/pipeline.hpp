// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selflabel/clustering.hpp"
#include "selflabel/config.hpp"
#include "selflabel/encoder.hpp"
#include "selflabel/metrics.hpp"
#include "selflabel/synthdata.hpp"

namespace selflabel {

struct ClusterConfig {
  std::size_t restarts = 10;
  std::size_t sweep_restarts = 3;
  std::size_t max_iters = 100;
  std::size_t threads = 0;
  /// Length-normalise embeddings before k-means.
  bool normalize = false;
};

/// Held-out evaluation material. Trials are drawn from a held-out corpus
/// of fresh identities; the cohort is a second held-out corpus.
struct EvalConfig {
  std::size_t identities = 200;
  std::size_t groups_per_identity = 2;
  std::size_t segments_per_group = 5;
  std::size_t target_trials = 20000;
  std::size_t nontarget_trials = 20000;
  std::size_t cohort_size = 50;
  std::size_t top_n = 50;
  DcfParams dcf;
  /// Audio and visual weights of the fused score system.
  std::vector<double> fusion_weights{0.5, 0.5};
};

struct PipelineConfig {
  /// Training corpus directory; generated from `synth` when absent.
  std::optional<std::filesystem::path> corpus_path;
  SynthConfig synth;
  /// Master seed. Corpus, training and clustering seeds derive from it.
  std::uint64_t seed = 1;
  std::size_t rounds = 3;
  std::vector<std::size_t> k_grid{100, 150, 200, 250, 300, 400};
  std::optional<std::size_t> fixed_k;
  TrainConfig pretrain;
  TrainConfig train;
  ClusterConfig cluster;
  EvalConfig eval;
  bool use_group_consolidation = false;
  std::filesystem::path output_dir = "run";

  PipelineConfig();

  /// Throws ConfigError.
  void validate() const;

  /// Reads every recognised key; throws ConfigError on unknown keys.
  static PipelineConfig from_config(const KeyValueConfig& kv);
  /// Canonical key = value text. `rounds` and `output_dir` are omitted when
  /// `for_fingerprint` is set, since resuming with more rounds or a moved
  /// directory is allowed.
  std::string to_text(bool for_fingerprint = false) const;
};

/// Synthetic configuration used by the corpus-facing defaults.
SynthConfig default_synth_config();

/// Paths of one round directory.
struct RoundPaths {
  std::filesystem::path dir;
  std::filesystem::path audio_encoder() const { return dir / "audio_encoder.enc"; }
  std::filesystem::path visual_encoder() const { return dir / "visual_encoder.enc"; }
  std::filesystem::path audio_log() const { return dir / "audio_train.tsv"; }
  std::filesystem::path visual_log() const { return dir / "visual_train.tsv"; }
  std::filesystem::path audio_embeddings() const { return dir / "audio.emb"; }
  std::filesystem::path visual_embeddings() const { return dir / "visual.emb"; }
  std::filesystem::path audio_labels() const { return dir / "audio_labels.tsv"; }
  std::filesystem::path visual_labels() const { return dir / "visual_labels.tsv"; }
  std::filesystem::path joint_labels() const { return dir / "joint_labels.tsv"; }
  std::filesystem::path fused_labels() const { return dir / "fused_labels.tsv"; }
  /// Pseudo labels handed to the next round.
  std::filesystem::path labels() const { return dir / "labels.tsv"; }
  std::filesystem::path wss_curve() const { return dir / "wss_curve.tsv"; }
  std::filesystem::path fusion_report() const { return dir / "fusion_report.json"; }
  std::filesystem::path scores(std::string_view system, bool normalized) const;
  std::filesystem::path report() const { return dir / "report.json"; }
};

/// Everything a round needs that does not change between rounds.
struct PipelineContext {
  PipelineConfig config;
  MultiModalCorpus corpus;    // training corpus
  MultiModalCorpus eval;      // held-out trial material
  MultiModalCorpus cohort;    // held-out cohort material
  std::vector<Trial> trials;
  std::filesystem::path root;

  RoundPaths round(std::size_t index) const { return {root / ("round_" + std::to_string(index))}; }
};

/// Validates the config, prepares the output directory and loads or
/// generates the training corpus, held-out corpora and trial list.
/// Throws ConfigError when the directory already holds a run made with a
/// different configuration.
PipelineContext prepare_pipeline(const PipelineConfig& config);

/// Balanced target / nontarget trials over `eval` (evaluation-only use of
/// identity_gt).
std::vector<Trial> make_trials(const MultiModalCorpus& eval, std::size_t targets,
                               std::size_t nontargets, std::uint64_t seed);

/// Contrastive pretraining, K selection and audio-only pseudo labels.
/// Writes round_0 atomically and returns its path.
RoundPaths run_stage1(const PipelineContext& ctx);

/// Trains fresh audio and visual classifiers on the previous round's
/// labels, clusters both embeddings and the joint embedding, fuses the
/// three labelings and writes round_<index> atomically.
RoundPaths run_round(const PipelineContext& ctx, std::size_t index);

/// Recomputes a round report purely from the files in the round directory
/// plus the context's corpora and trials.
std::string compute_round_report(const PipelineContext& ctx, std::size_t index);

/// Per-round series and final-round score normalisation summary, built
/// from the stored round reports.
std::string compute_final_report(const PipelineContext& ctx);

struct PipelineOptions {
  /// Stop after this round, leaving a resumable directory (no final report).
  std::optional<std::size_t> stop_after_round;
  /// Progress messages.
  std::function<void(const std::string&)> log;
};

/// Runs stage 1 and `rounds` stage-2 rounds, skipping rounds whose
/// directory already exists, then writes final_report.json. Returns the
/// final report text (empty when stopped early).
std::string run_pipeline(const PipelineConfig& config, const PipelineOptions& options = {});

/// Derived seeds used by the pipeline.
std::uint64_t pretrain_seed(std::uint64_t master);
std::uint64_t round_train_seed(std::uint64_t master, std::size_t round, Modality m);
std::uint64_t round_cluster_seed(std::uint64_t master, std::size_t round);

}  // namespace selflabel
