// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "selflabel/synthdata.hpp"

#include <cmath>
#include <cstdio>

#include "selflabel/errors.hpp"

namespace selflabel {
namespace {

// Sub-stream tags for derive_seed.
constexpr std::uint64_t kChannelStream = 1;
constexpr std::uint64_t kIdentityStream = 2;
constexpr std::uint64_t kSessionStream = 3;
constexpr std::uint64_t kOrderStream = 4;

struct ChannelBasis {
  Matrix audio;   // channel_rank x audio_dim, unit rows
  Matrix visual;  // channel_rank x visual_dim, unit rows
};

Matrix unit_directions(std::size_t count, std::size_t dim, Rng& rng) {
  Matrix dirs(count, dim);
  for (std::size_t r = 0; r < count; ++r) {
    auto row = dirs.row(r);
    for (double& v : row) v = rng.normal();
    const double n = norm(row);
    for (double& v : row) v /= n;
  }
  return dirs;
}

ChannelBasis channel_basis(const SynthConfig& config) {
  Rng rng(derive_seed(config.seed, kChannelStream));
  ChannelBasis basis;
  basis.audio = unit_directions(config.channel_rank, config.audio_dim, rng);
  basis.visual = unit_directions(config.channel_rank, config.visual_dim, rng);
  return basis;
}

Vector gaussian_vector(std::size_t dim, double scale, Rng& rng) {
  Vector v(dim);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

Vector observe(const Vector& prototype, const Vector& group_offset, const Matrix& channel,
               double spread, double noise, Rng& rng) {
  Vector x(prototype.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = prototype[i] + group_offset[i];
  for (std::size_t r = 0; r < channel.rows(); ++r) {
    const double weight = spread * rng.normal();
    const auto dir = channel.row(r);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += weight * dir[i];
  }
  for (double& v : x) v = static_cast<double>(static_cast<float>(v + noise * rng.normal()));
  return x;
}

std::string ordinal_id(std::string_view prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", n);
  return std::string(prefix) + buf;
}

MultiModalCorpus build(const SynthConfig& config, std::size_t identities, std::size_t groups,
                       std::size_t segments, std::uint64_t identity_seed, std::uint64_t session_seed,
                       std::uint64_t order_seed, std::string_view prefix) {
  const ChannelBasis basis = channel_basis(config);
  Rng identity_rng(identity_seed);
  Rng session_rng(session_seed);
  const double group_scale = config.within_identity_spread / 4.0;

  std::vector<Sample> ordered;
  ordered.reserve(identities * groups * segments);
  std::vector<std::size_t> group_of;
  for (std::size_t id = 0; id < identities; ++id) {
    const Vector audio_proto = gaussian_vector(config.audio_dim, 1.0, identity_rng);
    const Vector visual_proto = gaussian_vector(config.visual_dim, 1.0, identity_rng);
    for (std::size_t g = 0; g < groups; ++g) {
      const Vector audio_offset = gaussian_vector(config.audio_dim, group_scale, session_rng);
      const Vector visual_offset = gaussian_vector(config.visual_dim, group_scale, session_rng);
      for (std::size_t s = 0; s < segments; ++s) {
        Sample sample;
        sample.identity_gt = static_cast<int>(id);
        sample.audio = observe(audio_proto, audio_offset, basis.audio, config.within_identity_spread,
                               config.observation_noise, session_rng);
        sample.visual = observe(visual_proto, visual_offset, basis.visual,
                                config.within_identity_spread, config.observation_noise, session_rng);
        ordered.push_back(std::move(sample));
        group_of.push_back(id * groups + g);
      }
    }
  }

  auto order = iota_indices(ordered.size());
  Rng order_rng(order_seed);
  order_rng.shuffle(order);

  // Group names are assigned in order of first appearance after shuffling.
  std::vector<std::size_t> group_name(identities * groups, SIZE_MAX);
  std::size_t next_group = 0;
  MultiModalCorpus corpus;
  corpus.config = config;
  corpus.samples.reserve(ordered.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    Sample sample = std::move(ordered[order[pos]]);
    auto& name = group_name[group_of[order[pos]]];
    if (name == SIZE_MAX) name = next_group++;
    sample.sample_id = ordinal_id(std::string(prefix) + "utt", pos);
    sample.group_id = ordinal_id(std::string(prefix) + "rec", name);
    corpus.samples.push_back(std::move(sample));
  }
  return corpus;
}

}  // namespace

std::string_view to_string(Modality m) { return m == Modality::kAudio ? "audio" : "visual"; }

Modality parse_modality(std::string_view text) {
  if (text == "audio") return Modality::kAudio;
  if (text == "visual") return Modality::kVisual;
  throw ConfigError("unknown modality '" + std::string(text) + "' (expected audio|visual)");
}

void SynthConfig::validate() const {
  if (num_identities == 0 || groups_per_identity == 0 || segments_per_group == 0)
    throw ConfigError("synthetic corpus counts must all be >= 1");
  if (audio_dim == 0 || visual_dim == 0) throw ConfigError("feature dimensions must be >= 1");
  if (!(within_identity_spread >= 0.0) || !(observation_noise >= 0.0))
    throw ConfigError("spread and noise must be non-negative");
  if (!(augmentation_noise.low >= 0.0) || !(augmentation_noise.low <= augmentation_noise.high))
    throw ConfigError("augmentation noise range must satisfy 0 <= low <= high");
}

Matrix feature_matrix(const MultiModalCorpus& corpus, Modality m) {
  if (corpus.samples.empty()) return {};
  const std::size_t dim = corpus.samples.front().features(m).size();
  Matrix x(corpus.size(), dim);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Vector& f = corpus.samples[i].features(m);
    if (f.size() != dim) throw ConsistencyError("sample " + corpus.samples[i].sample_id + " has wrong " +
                                                std::string(to_string(m)) + " dimension");
    std::copy(f.begin(), f.end(), x.row(i).begin());
  }
  return x;
}

std::vector<std::string> sample_ids(const MultiModalCorpus& corpus) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& s : corpus.samples) ids.push_back(s.sample_id);
  return ids;
}

std::vector<int> ground_truth_labels(const MultiModalCorpus& corpus) {
  std::vector<int> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.samples) out.push_back(s.identity_gt);
  return out;
}

std::vector<std::string> group_ids(const MultiModalCorpus& corpus) {
  std::vector<std::string> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.samples) out.push_back(s.group_id);
  return out;
}

MultiModalCorpus generate_corpus(const SynthConfig& config) {
  config.validate();
  return build(config, config.num_identities, config.groups_per_identity, config.segments_per_group,
               derive_seed(config.seed, kIdentityStream), derive_seed(config.seed, kSessionStream),
               derive_seed(config.seed, kOrderStream), "");
}

MultiModalCorpus generate_heldout_corpus(const SynthConfig& config, std::size_t num_identities,
                                         std::size_t groups_per_identity,
                                         std::size_t segments_per_group, std::uint64_t stream,
                                         std::string_view id_prefix) {
  config.validate();
  if (num_identities == 0 || groups_per_identity == 0 || segments_per_group == 0)
    throw ConfigError("held-out corpus counts must all be >= 1");
  const std::uint64_t base = derive_seed(config.seed, 1000 + stream);
  SynthConfig heldout = config;
  heldout.num_identities = num_identities;
  heldout.groups_per_identity = groups_per_identity;
  heldout.segments_per_group = segments_per_group;
  MultiModalCorpus corpus =
      build(config, num_identities, groups_per_identity, segments_per_group,
            derive_seed(base, kIdentityStream), derive_seed(base, kSessionStream),
            derive_seed(base, kOrderStream), id_prefix);
  corpus.config = heldout;
  return corpus;
}

std::pair<Vector, Vector> make_contrastive_views(std::span<const double> clean, NoiseRange range,
                                                 Rng& rng) {
  auto view = [&] {
    const double scale = rng.uniform(range.low, range.high);
    Vector v(clean.begin(), clean.end());
    if (scale > 0.0)
      for (double& x : v) x += scale * rng.normal();
    return v;
  };
  Vector first = view();
  Vector second = view();
  return {std::move(first), std::move(second)};
}

std::pair<Vector, Vector> make_contrastive_views(const Sample& sample, Modality modality,
                                                 NoiseRange range, Rng& rng) {
  return make_contrastive_views(sample.features(modality), range, rng);
}

Matrix round_to_float(Matrix m) {
  for (double& v : m.values()) v = static_cast<double>(static_cast<float>(v));
  return m;
}

}  // namespace selflabel
