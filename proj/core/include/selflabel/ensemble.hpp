// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "selflabel/assignment.hpp"
#include "selflabel/clustering.hpp"
#include "selflabel/matrix.hpp"

namespace selflabel {

/// omega(l, l') = number of samples with reference label l and current
/// label l'. Stored row-major, K x K.
struct ContingencyMatrix {
  std::size_t k = 0;
  std::vector<std::int64_t> omega;

  std::int64_t operator()(std::size_t ref, std::size_t cur) const { return omega[ref * k + cur]; }
  std::int64_t& operator()(std::size_t ref, std::size_t cur) { return omega[ref * k + cur]; }
  std::int64_t total() const;
};

/// Permutation of [0, K) mapping a current-clustering label to the
/// reference label it corresponds to.
struct Correspondence {
  std::vector<int> theta;
  /// sum over l' of omega(theta[l'], l'): the maximised co-occurrence.
  std::int64_t objective = 0;
};

ContingencyMatrix contingency(const Assignment& ref, const Assignment& cur);

/// Maximum-weight perfect matching on the contingency matrix (Hungarian
/// algorithm in exact integer arithmetic, O(K^3)).
Correspondence correspond(const ContingencyMatrix& omega);

/// Minimum-cost assignment for a square integer cost matrix (row-major,
/// n x n). Returns row -> column.
std::vector<int> hungarian_min_cost(const std::vector<std::int64_t>& cost, std::size_t n,
                                    std::int64_t* total_cost = nullptr);

/// Renames every label l' to theta[l']; the partition is unchanged.
Assignment relabel(const Assignment& cur, const Correspondence& theta);

/// Per-row unit-normalised audio block followed by the unit-normalised
/// visual block. Throws NumericError naming the row on a zero-norm block.
Matrix joint_embeddings(const Matrix& audio, const Matrix& visual,
                        const std::vector<std::string>* sample_ids = nullptr);

struct VoteCounts {
  std::size_t unanimous = 0;
  std::size_t majority = 0;      // exactly two of three agree
  std::size_t all_distinct = 0;  // joint reference label kept
};

/// Label shared by at least two of the three inputs, otherwise the
/// reference label. All inputs must already live in the reference label space.
Assignment majority_vote(const Assignment& ref_joint, const Assignment& audio_aligned,
                         const Assignment& visual_aligned, VoteCounts* counts = nullptr);

/// Replaces every label inside a group with the group's most frequent
/// label; ties go to the smallest label.
Assignment consolidate_groups(const Assignment& labels, const std::vector<std::string>& groups);

struct FusionResult {
  Assignment fused;
  Assignment audio;   // aligned to the joint label space
  Assignment visual;  // aligned to the joint label space
  Assignment joint;
  Correspondence audio_to_joint;
  Correspondence visual_to_joint;
  VoteCounts votes;
};

/// Clusters audio, visual and joint embeddings at the same K, aligns the
/// audio and visual labelings to the joint one and takes a majority vote.
FusionResult fuse_pseudo_labels(const Matrix& audio, const Matrix& visual, std::size_t k,
                                const KMeansOptions& options);

/// As above, from three already computed clusterings.
FusionResult fuse_assignments(const Assignment& audio, const Assignment& visual,
                              const Assignment& joint);

}  // namespace selflabel
