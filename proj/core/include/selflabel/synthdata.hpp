// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selflabel/matrix.hpp"
#include "selflabel/rng.hpp"

namespace selflabel {

enum class Modality { kAudio, kVisual };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view text);

/// Range of the per-view additive noise standard deviation used by the
/// augmentation analog.
struct NoiseRange {
  double low = 0.0;
  double high = 0.0;
  bool operator==(const NoiseRange&) const = default;
};

/// Parameters of the synthetic audio-visual corpus.
///
/// Each identity owns one prototype per modality, drawn from a unit
/// Gaussian. Each recording group adds an isotropic offset with standard
/// deviation within_identity_spread / 4. Each segment adds a low-rank
/// "channel" term (within_identity_spread times a standard normal mix of
/// `channel_rank` fixed unit directions per modality) and isotropic
/// observation noise.
struct SynthConfig {
  std::size_t num_identities = 200;
  std::size_t groups_per_identity = 3;
  std::size_t segments_per_group = 10;
  std::size_t audio_dim = 20;
  std::size_t visual_dim = 20;
  double within_identity_spread = 1.5;
  double observation_noise = 0.6;
  NoiseRange augmentation_noise{0.1, 0.4};
  std::size_t channel_rank = 4;
  std::uint64_t seed = 1;

  std::size_t num_samples() const {
    return num_identities * groups_per_identity * segments_per_group;
  }
  std::size_t dim(Modality m) const { return m == Modality::kAudio ? audio_dim : visual_dim; }

  /// Throws ConfigError on zero counts/dims, negative spreads, low > high.
  void validate() const;

  bool operator==(const SynthConfig&) const = default;
};

struct Sample {
  std::string sample_id;
  Vector audio;
  Vector visual;
  int identity_gt = 0;   // evaluation only
  std::string group_id;  // evaluation / group consolidation only

  const Vector& features(Modality m) const { return m == Modality::kAudio ? audio : visual; }
  bool operator==(const Sample&) const = default;
};

struct MultiModalCorpus {
  std::vector<Sample> samples;
  SynthConfig config;

  std::size_t size() const { return samples.size(); }
  bool operator==(const MultiModalCorpus&) const = default;
};

/// Training-facing view of a corpus: feature rows in canonical sample
/// order and nothing else. Training entry points accept only this (or a
/// bare Matrix), never a MultiModalCorpus.
Matrix feature_matrix(const MultiModalCorpus& corpus, Modality m);
std::vector<std::string> sample_ids(const MultiModalCorpus& corpus);

/// Evaluation-only accessors.
std::vector<int> ground_truth_labels(const MultiModalCorpus& corpus);
std::vector<std::string> group_ids(const MultiModalCorpus& corpus);

/// Sample order is shuffled and ids are opaque ordinals, so neither
/// reveals identity. Feature values are rounded to float precision so the
/// corpus round-trips through EMB1 files exactly.
MultiModalCorpus generate_corpus(const SynthConfig& config);

/// Corpus of `num_identities` fresh identities recorded under the same
/// channel directions as `generate_corpus(config)`. `stream` selects the
/// identity draw; ids are prefixed with `id_prefix`.
MultiModalCorpus generate_heldout_corpus(const SynthConfig& config, std::size_t num_identities,
                                         std::size_t groups_per_identity,
                                         std::size_t segments_per_group, std::uint64_t stream,
                                         std::string_view id_prefix);

/// Two independently perturbed views of `clean`; each view gets additive
/// N(0, s^2) noise with s drawn uniformly from `range`.
std::pair<Vector, Vector> make_contrastive_views(std::span<const double> clean, NoiseRange range,
                                                 Rng& rng);
std::pair<Vector, Vector> make_contrastive_views(const Sample& sample, Modality modality,
                                                 NoiseRange range, Rng& rng);

/// Corpus directory: meta.tsv, audio.emb, visual.emb, plus synth.cfg when
/// the generating configuration is known.
void write_corpus(const MultiModalCorpus& corpus, const std::filesystem::path& dir);
MultiModalCorpus read_corpus(const std::filesystem::path& dir);

/// EMB1 embedding files: "EMB1", u32 LE rows, u32 LE dim, rows of f32 LE.
void write_embeddings(const Matrix& rows, const std::filesystem::path& path);
Matrix read_embeddings(const std::filesystem::path& path);

/// Rounds every entry to the nearest float, i.e. what an EMB1 round trip
/// produces.
Matrix round_to_float(Matrix m);

}  // namespace selflabel
