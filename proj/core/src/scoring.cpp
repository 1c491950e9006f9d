// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "selflabel/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "selflabel/errors.hpp"

namespace selflabel {

void ScoreSet::validate() const {
  if (scores.size() != trials.size()) throw ArgumentError("score set has mismatched lengths");
  if (!all_finite(scores)) throw ArgumentError("score set contains non-finite scores");
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> ids, Matrix rows)
    : ids_(std::move(ids)), rows_(std::move(rows)) {
  if (ids_.size() != rows_.rows()) throw ArgumentError("embedding table id/row count mismatch");
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (!index_.emplace(ids_[i], i).second) throw ArgumentError("duplicate embedding id " + ids_[i]);
}

std::span<const double> EmbeddingTable::at(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw LookupError("unknown embedding id '" + id + "'");
  return rows_.row(it->second);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("cosine of vectors with different dimensions");
  const double na = norm(a);
  const double nb = norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw NumericError("cosine similarity of a zero-norm embedding");
  return dot(a, b) / (na * nb);
}

ScoreSet cosine_score(const std::vector<Trial>& trials, const EmbeddingTable& embeddings) {
  ScoreSet out{trials, Vector(trials.size()), false};
  for (std::size_t t = 0; t < trials.size(); ++t)
    out.scores[t] = cosine_similarity(embeddings.at(trials[t].enroll_id), embeddings.at(trials[t].test_id));
  return out;
}

TopStats top_n_stats(std::span<const double> scores, std::size_t top_n) {
  if (top_n == 0 || top_n > scores.size())
    throw ArgumentError("top_n must lie in [1, " + std::to_string(scores.size()) + "]");
  Vector sorted(scores.begin(), scores.end());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(top_n), sorted.end(),
                    std::greater<>());
  double mean = 0.0;
  for (std::size_t i = 0; i < top_n; ++i) mean += sorted[i];
  mean /= static_cast<double>(top_n);
  double var = 0.0;
  for (std::size_t i = 0; i < top_n; ++i) var += (sorted[i] - mean) * (sorted[i] - mean);
  return {mean, std::sqrt(var / static_cast<double>(top_n))};
}

namespace {

double normalize_side(double raw, const TopStats& s, const char* side) {
  if (!(s.stddev > 0.0))
    throw DegenerateCohortError(std::string("degenerate cohort: ") + side +
                                "-side top-n cohort scores have zero spread");
  return (raw - s.mean) / s.stddev;
}

}  // namespace

double as_norm_score(double raw, std::span<const double> enroll_cohort_scores,
                     std::span<const double> test_cohort_scores, std::size_t top_n) {
  const TopStats e = top_n_stats(enroll_cohort_scores, top_n);
  const TopStats t = top_n_stats(test_cohort_scores, top_n);
  return 0.5 * (normalize_side(raw, e, "enroll") + normalize_side(raw, t, "test"));
}

ScoreSet as_norm(const ScoreSet& raw, const EmbeddingTable& embeddings, const Cohort& cohort,
                 std::size_t top_n) {
  raw.validate();
  if (cohort.size() < 2) throw ArgumentError("cohort needs at least 2 embeddings");
  if (top_n == 0 || top_n > cohort.size())
    throw ArgumentError("top_n = " + std::to_string(top_n) + " outside [1, " +
                        std::to_string(cohort.size()) + "]");

  std::unordered_map<std::string, TopStats> cache;
  auto stats_for = [&](const std::string& id) -> const TopStats& {
    if (auto it = cache.find(id); it != cache.end()) return it->second;
    const auto z = embeddings.at(id);
    Vector cohort_scores(cohort.size());
    for (std::size_t c = 0; c < cohort.size(); ++c)
      cohort_scores[c] = cosine_similarity(z, cohort.embeddings.row(c));
    return cache.emplace(id, top_n_stats(cohort_scores, top_n)).first->second;
  };

  ScoreSet out{raw.trials, Vector(raw.size()), true};
  for (std::size_t t = 0; t < raw.size(); ++t) {
    const double s = raw.scores[t];
    out.scores[t] = 0.5 * (normalize_side(s, stats_for(raw.trials[t].enroll_id), "enroll") +
                           normalize_side(s, stats_for(raw.trials[t].test_id), "test"));
  }
  return out;
}

ScoreSet fuse_scores(std::span<const ScoreSet> score_sets, std::span<const double> weights) {
  if (score_sets.empty()) throw ArgumentError("score fusion needs at least one score set");
  if (weights.size() != score_sets.size())
    throw ArgumentError("score fusion needs one weight per score set");
  double weight_sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ArgumentError("fusion weights must be non-negative");
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) throw ArgumentError("fusion weights must sum to 1");

  const ScoreSet& first = score_sets.front();
  for (const auto& s : score_sets) {
    s.validate();
    if (s.trials != first.trials) throw ArgumentError("score sets to fuse have different trial lists");
  }
  ScoreSet out{first.trials, Vector(first.size(), 0.0), false};
  out.normalized = std::all_of(score_sets.begin(), score_sets.end(),
                               [](const ScoreSet& s) { return s.normalized; });
  for (std::size_t t = 0; t < out.size(); ++t) {
    double v = 0.0;
    for (std::size_t s = 0; s < score_sets.size(); ++s) {
      if (weights[s] == 0.0) continue;
      v += weights[s] * score_sets[s].scores[t];
    }
    out.scores[t] = v;
  }
  return out;
}

}  // namespace selflabel
