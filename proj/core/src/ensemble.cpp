// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "selflabel/ensemble.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

#include "selflabel/errors.hpp"
#include "selflabel/rng.hpp"

namespace selflabel {

std::int64_t ContingencyMatrix::total() const {
  std::int64_t t = 0;
  for (const auto v : omega) t += v;
  return t;
}

ContingencyMatrix contingency(const Assignment& ref, const Assignment& cur) {
  if (ref.size() != cur.size())
    throw ArgumentError("contingency needs equal-length assignments (" + std::to_string(ref.size()) +
                        " vs " + std::to_string(cur.size()) + ")");
  if (ref.k != cur.k)
    throw ArgumentError("contingency needs equal K (" + std::to_string(ref.k) + " vs " +
                        std::to_string(cur.k) + ")");
  ref.validate();
  cur.validate();
  ContingencyMatrix m{ref.k, std::vector<std::int64_t>(ref.k * ref.k, 0)};
  for (std::size_t i = 0; i < ref.size(); ++i)
    ++m(static_cast<std::size_t>(ref.labels[i]), static_cast<std::size_t>(cur.labels[i]));
  return m;
}

Correspondence correspond(const ContingencyMatrix& omega) {
  const std::size_t k = omega.k;
  if (omega.omega.size() != k * k) throw ArgumentError("contingency matrix is not square");
  // Rows are current labels, columns reference labels; cost is negated
  // co-occurrence so the minimum-cost matching maximises agreement.
  std::vector<std::int64_t> cost(k * k);
  for (std::size_t cur = 0; cur < k; ++cur)
    for (std::size_t ref = 0; ref < k; ++ref) cost[cur * k + ref] = -omega(ref, cur);
  Correspondence c;
  std::int64_t total = 0;
  c.theta = hungarian_min_cost(cost, k, &total);
  c.objective = -total;
  return c;
}

Assignment relabel(const Assignment& cur, const Correspondence& theta) {
  if (theta.theta.size() != cur.k)
    throw ArgumentError("correspondence covers " + std::to_string(theta.theta.size()) +
                        " labels, assignment has K = " + std::to_string(cur.k));
  cur.validate();
  Assignment out{std::vector<int>(cur.size()), cur.k};
  for (std::size_t i = 0; i < cur.size(); ++i)
    out.labels[i] = theta.theta[static_cast<std::size_t>(cur.labels[i])];
  return out;
}

Matrix joint_embeddings(const Matrix& audio, const Matrix& visual,
                        const std::vector<std::string>* sample_ids) {
  if (audio.rows() != visual.rows())
    throw ArgumentError("audio and visual embeddings have different row counts");
  const std::size_t da = audio.cols();
  Matrix joint(audio.rows(), da + visual.cols());
  auto copy_unit = [&](std::span<const double> src, std::span<double> dst, std::size_t row,
                       std::string_view modality) {
    const double n = norm(src);
    if (!(n > 0.0) || !std::isfinite(n)) {
      const std::string who = sample_ids ? (*sample_ids)[row] : "row " + std::to_string(row);
      throw NumericError("zero-norm " + std::string(modality) + " embedding for " + who);
    }
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j] / n;
  };
  for (std::size_t i = 0; i < audio.rows(); ++i) {
    auto row = joint.row(i);
    copy_unit(audio.row(i), row.subspan(0, da), i, "audio");
    copy_unit(visual.row(i), row.subspan(da), i, "visual");
  }
  return joint;
}

Assignment majority_vote(const Assignment& ref_joint, const Assignment& audio_aligned,
                         const Assignment& visual_aligned, VoteCounts* counts) {
  if (ref_joint.size() != audio_aligned.size() || ref_joint.size() != visual_aligned.size())
    throw ArgumentError("majority vote needs equal-length assignments");
  VoteCounts local;
  Assignment out{std::vector<int>(ref_joint.size()),
                 std::max({ref_joint.k, audio_aligned.k, visual_aligned.k})};
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int j = ref_joint.labels[i], a = audio_aligned.labels[i], v = visual_aligned.labels[i];
    if (j == a && a == v) {
      ++local.unanimous;
      out.labels[i] = j;
    } else if (a == v) {
      ++local.majority;
      out.labels[i] = a;
    } else if (j == a || j == v) {
      ++local.majority;
      out.labels[i] = j;
    } else {
      ++local.all_distinct;
      out.labels[i] = j;
    }
  }
  if (counts) *counts = local;
  return out;
}

Assignment consolidate_groups(const Assignment& labels, const std::vector<std::string>& groups) {
  if (groups.size() != labels.size())
    throw ArgumentError("every sample needs a group id for consolidation");
  std::unordered_map<std::string, std::map<int, std::size_t>> histogram;
  for (std::size_t i = 0; i < labels.size(); ++i) ++histogram[groups[i]][labels.labels[i]];
  std::unordered_map<std::string, int> mode;
  for (const auto& [group, counts] : histogram) {
    int best_label = counts.begin()->first;
    std::size_t best_count = 0;
    for (const auto& [label, count] : counts)  // ascending label order
      if (count > best_count) {
        best_count = count;
        best_label = label;
      }
    mode.emplace(group, best_label);
  }
  Assignment out = labels;
  for (std::size_t i = 0; i < labels.size(); ++i) out.labels[i] = mode.at(groups[i]);
  return out;
}

FusionResult fuse_assignments(const Assignment& audio, const Assignment& visual,
                              const Assignment& joint) {
  FusionResult r;
  r.joint = joint;
  r.audio_to_joint = correspond(contingency(joint, audio));
  r.visual_to_joint = correspond(contingency(joint, visual));
  r.audio = relabel(audio, r.audio_to_joint);
  r.visual = relabel(visual, r.visual_to_joint);
  r.fused = majority_vote(r.joint, r.audio, r.visual, &r.votes);
  return r;
}

FusionResult fuse_pseudo_labels(const Matrix& audio, const Matrix& visual, std::size_t k,
                                const KMeansOptions& options) {
  if (audio.rows() != visual.rows())
    throw ArgumentError("audio and visual embeddings must share sample order");
  const Matrix joint = joint_embeddings(audio, visual);
  auto cluster = [&](const Matrix& x, std::uint64_t stream) {
    KMeansOptions o = options;
    o.seed = derive_seed(options.seed, stream);
    return kmeans(x, k, o).assignment;
  };
  return fuse_assignments(cluster(audio, 100), cluster(visual, 101), cluster(joint, 102));
}

}  // namespace selflabel
