// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "selflabel/matrix.hpp"

namespace selflabel {

struct Trial {
  std::string enroll_id;
  std::string test_id;
  bool is_target = false;
  bool operator==(const Trial&) const = default;
};

struct ScoreSet {
  std::vector<Trial> trials;
  Vector scores;
  bool normalized = false;

  std::size_t size() const { return trials.size(); }
  /// Throws ArgumentError on length mismatch or non-finite scores.
  void validate() const;
};

/// Embedding rows addressed by sample id.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> ids, Matrix rows);

  /// Throws LookupError for an unknown id.
  std::span<const double> at(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.contains(id); }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& rows() const { return rows_; }

 private:
  std::vector<std::string> ids_;
  Matrix rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Impostor embeddings used for score normalisation.
struct Cohort {
  Matrix embeddings;
  std::size_t size() const { return embeddings.rows(); }
};

/// Throws NumericError if either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

ScoreSet cosine_score(const std::vector<Trial>& trials, const EmbeddingTable& embeddings);

struct TopStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

/// Mean and population standard deviation of the `top_n` largest values.
TopStats top_n_stats(std::span<const double> scores, std::size_t top_n);

/// Adaptive symmetric normalisation of one score given the cohort scores
/// of each trial side: 0.5 * ((s - mu_e) / sd_e + (s - mu_t) / sd_t) over
/// each side's top_n cohort scores. Throws DegenerateCohortError naming the
/// side whose top-n scores have zero spread.
double as_norm_score(double raw, std::span<const double> enroll_cohort_scores,
                     std::span<const double> test_cohort_scores, std::size_t top_n);

/// Cosine scores of every trial side against the cohort feed
/// as_norm_score. Trial order is preserved; the result is flagged
/// normalized. Throws ArgumentError when top_n is 0 or exceeds the cohort.
ScoreSet as_norm(const ScoreSet& raw, const EmbeddingTable& embeddings, const Cohort& cohort,
                 std::size_t top_n);

/// Per-trial weighted mean of score sets over identical trial lists.
/// Weights must be non-negative and sum to 1 (within 1e-9).
ScoreSet fuse_scores(std::span<const ScoreSet> score_sets, std::span<const double> weights);

}  // namespace selflabel
