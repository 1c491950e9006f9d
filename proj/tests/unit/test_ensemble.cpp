// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "selflabel/ensemble.hpp"
#include "selflabel/errors.hpp"
#include "selflabel/metrics.hpp"
#include "test_util.hpp"

namespace {

using namespace selflabel;

ContingencyMatrix matrix_of(const std::vector<std::vector<std::int64_t>>& rows) {
  ContingencyMatrix m;
  m.k = rows.size();
  for (const auto& r : rows) m.omega.insert(m.omega.end(), r.begin(), r.end());
  return m;
}

Assignment random_assignment(std::size_t n, std::size_t k, Rng& rng) {
  Assignment a{std::vector<int>(n), k};
  for (auto& l : a.labels) l = static_cast<int>(rng.below(k));
  return a;
}

TEST(Contingency, SelfIsDiagonalClusterSizes) {
  const Assignment a{{0, 2, 2, 1, 2, 0}, 3};
  const auto m = contingency(a, a);
  const std::int64_t sizes[3] = {2, 1, 3};
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(m(r, c), r == c ? sizes[r] : 0);
  EXPECT_EQ(m.total(), 6);
}

TEST(Contingency, DirectCounting) {
  const auto m = contingency(Assignment{{0, 0, 1}, 2}, Assignment{{1, 1, 0}, 2});
  EXPECT_EQ(m.omega, (std::vector<std::int64_t>{0, 2, 1, 0}));
}

TEST(Contingency, MatchesNaiveCounter) {
  Rng rng(1);
  const auto ref = random_assignment(1000, 8, rng);
  const auto cur = random_assignment(1000, 8, rng);
  const auto m = contingency(ref, cur);
  for (int l = 0; l < 8; ++l)
    for (int lp = 0; lp < 8; ++lp) {
      std::int64_t count = 0;
      for (std::size_t i = 0; i < 1000; ++i) count += (ref.labels[i] == l && cur.labels[i] == lp);
      EXPECT_EQ(m(l, lp), count);
    }
}

TEST(Contingency, MismatchErrors) {
  EXPECT_THROW(contingency(Assignment{{0, 1}, 2}, Assignment{{0, 1}, 3}), ArgumentError);
  EXPECT_THROW(contingency(Assignment{{0, 1}, 2}, Assignment{{0, 1, 1}, 2}), ArgumentError);
}

TEST(Correspond, IdentityMapping) {
  const auto c = correspond(matrix_of({{5, 1}, {2, 7}}));
  EXPECT_EQ(c.theta, (std::vector<int>{0, 1}));
  EXPECT_EQ(c.objective, 12);
  EXPECT_EQ(c.objective, oracle::best_permutation_objective({{5, 1}, {2, 7}}));
}

TEST(Correspond, SwapMapping) {
  const auto c = correspond(matrix_of({{1, 5}, {7, 2}}));
  EXPECT_EQ(c.theta, (std::vector<int>{1, 0}));
  EXPECT_EQ(c.objective, 12);
}

TEST(Correspond, ScaledIdentity) {
  for (std::size_t k : {1u, 3u, 7u, 20u}) {
    std::vector<std::vector<std::int64_t>> rows(k, std::vector<std::int64_t>(k, 0));
    for (std::size_t i = 0; i < k; ++i) rows[i][i] = 4;
    std::vector<int> id(k);
    std::iota(id.begin(), id.end(), 0);
    EXPECT_EQ(correspond(matrix_of(rows)).theta, id);
  }
}

TEST(Correspond, MatchesExhaustiveSearch) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + rng.below(6);
    std::vector<std::vector<std::int64_t>> rows(k, std::vector<std::int64_t>(k));
    for (auto& r : rows)
      for (auto& v : r) v = static_cast<std::int64_t>(rng.below(50));
    const auto c = correspond(matrix_of(rows));
    EXPECT_EQ(c.objective, oracle::best_permutation_objective(rows));
    std::int64_t realised = 0;
    for (std::size_t lp = 0; lp < k; ++lp) realised += rows[c.theta[lp]][lp];
    EXPECT_EQ(realised, c.objective);
    std::set<int> image(c.theta.begin(), c.theta.end());
    EXPECT_EQ(image.size(), k);
  }
}

TEST(Relabel, IdentityAndSwap) {
  const Assignment a{{0, 1, 0}, 2};
  EXPECT_EQ(relabel(a, Correspondence{{0, 1}, 0}), a);
  EXPECT_EQ(relabel(a, Correspondence{{1, 0}, 0}).labels, (std::vector<int>{1, 0, 1}));
}

TEST(Relabel, PreservesPartition) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_assignment(200, 6, rng);
    auto perm = iota_indices(6);
    rng.shuffle(perm);
    Correspondence theta{std::vector<int>(perm.begin(), perm.end()), 0};
    EXPECT_EQ(nmi(relabel(a, theta), a), 1.0);
  }
}

TEST(JointEmbeddings, UnitRowsConcatenate) {
  Matrix a(1, 2), v(1, 2);
  a(0, 0) = 1;
  v(0, 1) = 1;
  const Matrix j = joint_embeddings(a, v);
  EXPECT_EQ(std::vector<double>(j.values().begin(), j.values().end()), (std::vector<double>{1, 0, 0, 1}));
  a(0, 0) = 2;
  v(0, 1) = 2;
  const Matrix j2 = joint_embeddings(a, v);
  EXPECT_EQ(std::vector<double>(j2.values().begin(), j2.values().end()), (std::vector<double>{1, 0, 0, 1}));
}

TEST(JointEmbeddings, RowsHaveSquaredNormTwo) {
  Rng rng(4);
  const Matrix j = joint_embeddings(testutil::gaussian_matrix(3, 4, rng), testutil::gaussian_matrix(3, 5, rng));
  ASSERT_EQ(j.cols(), 9u);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_NEAR(dot(j.row(r), j.row(r)), 2.0, 1e-12);
}

TEST(JointEmbeddings, ZeroRowNamesSample) {
  Matrix a(2, 2, 1.0), v(2, 2, 1.0);
  v(1, 0) = v(1, 1) = 0;
  const std::vector<std::string> ids{"utt_a", "utt_b"};
  try {
    joint_embeddings(a, v, &ids);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("utt_b"), std::string::npos);
  }
}

TEST(MajorityVote, Rules) {
  EXPECT_EQ(majority_vote({{5}, 6}, {{2}, 6}, {{2}, 6}).labels, (std::vector<int>{2}));
  EXPECT_EQ(majority_vote({{2}, 6}, {{2}, 6}, {{5}, 6}).labels, (std::vector<int>{2}));
  EXPECT_EQ(majority_vote({{1}, 6}, {{2}, 6}, {{3}, 6}).labels, (std::vector<int>{1}));
  VoteCounts counts;
  const Assignment a{{0, 1, 2, 3}, 4};
  EXPECT_EQ(majority_vote(a, a, a, &counts), a);
  EXPECT_EQ(counts.unanimous, 4u);
}

TEST(MajorityVote, IdempotentAndWithinInputLabels) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = random_assignment(100, 5, rng);
    const auto a = random_assignment(100, 5, rng);
    const auto v = random_assignment(100, 5, rng);
    VoteCounts counts;
    const auto f = majority_vote(r, a, v, &counts);
    EXPECT_EQ(majority_vote(f, f, f), f);
    EXPECT_EQ(counts.unanimous + counts.majority + counts.all_distinct, 100u);
    for (std::size_t i = 0; i < 100; ++i)
      EXPECT_TRUE(f.labels[i] == r.labels[i] || f.labels[i] == a.labels[i] || f.labels[i] == v.labels[i]);
  }
  EXPECT_THROW(majority_vote({{0, 1}, 2}, {{0}, 2}, {{0, 1}, 2}), ArgumentError);
}

TEST(ConsolidateGroups, ModeRule) {
  EXPECT_EQ(consolidate_groups({{1, 1, 2}, 3}, {"g", "g", "g"}).labels, (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(consolidate_groups({{4}, 5}, {"solo"}).labels, (std::vector<int>{4}));
  EXPECT_EQ(consolidate_groups({{3, 4}, 5}, {"g", "g"}).labels, (std::vector<int>{3, 3}));
  EXPECT_EQ(consolidate_groups({{0, 1, 1, 0}, 2}, {"a", "b", "a", "b"}).labels, (std::vector<int>{0, 0, 0, 0}));
}

TEST(ConsolidateGroups, ConstantWithinGroupsAndFewerPairs) {
  Rng rng(6);
  const auto a = random_assignment(300, 10, rng);
  std::vector<std::string> groups(300);
  for (auto& g : groups) g = "g" + std::to_string(rng.below(30));
  const auto c = consolidate_groups(a, groups);
  std::map<std::string, int> label_of;
  std::set<std::pair<std::string, int>> before, after;
  for (std::size_t i = 0; i < 300; ++i) {
    auto [it, fresh] = label_of.emplace(groups[i], c.labels[i]);
    EXPECT_EQ(it->second, c.labels[i]);
    before.insert({groups[i], a.labels[i]});
    after.insert({groups[i], c.labels[i]});
  }
  EXPECT_LE(after.size(), before.size());
}

TEST(FusePseudoLabels, IdenticalModalitiesAgree) {
  Rng rng(7);
  const Matrix z = testutil::blobs(5, 30, 4, 6.0, rng);
  KMeansOptions o;
  o.seed = 3;
  const auto f = fuse_pseudo_labels(z, z, 5, o);
  EXPECT_EQ(nmi(f.fused, f.audio), 1.0);
  EXPECT_EQ(nmi(f.fused, f.joint), 1.0);
  EXPECT_EQ(nmi(f.fused, f.visual), 1.0);
  EXPECT_EQ(f.votes.unanimous, 150u);
}

TEST(FusePseudoLabels, NoisyModalityDoesNotDragFusionBelowIt) {
  Rng rng(8);
  std::vector<int> truth;
  const Matrix good = testutil::blobs(6, 40, 4, 6.0, rng, &truth);
  const Matrix noise = testutil::gaussian_matrix(240, 4, rng);
  KMeansOptions o;
  o.seed = 5;
  const auto f = fuse_pseudo_labels(good, noise, 6, o);
  EXPECT_GE(nmi(truth, f.fused.labels), nmi(truth, f.visual.labels));
  const auto again = fuse_pseudo_labels(good, noise, 6, o);
  EXPECT_EQ(again.fused, f.fused);
}

TEST(FuseAssignments, AlignsToJointSpace) {
  const Assignment joint{{0, 0, 1, 1, 2, 2}, 3};
  const Assignment audio{{2, 2, 0, 0, 1, 1}, 3};
  const Assignment visual{{1, 1, 2, 2, 0, 0}, 3};
  const auto f = fuse_assignments(audio, visual, joint);
  EXPECT_EQ(f.audio, joint);
  EXPECT_EQ(f.visual, joint);
  EXPECT_EQ(f.fused, joint);
}

}  // namespace
