// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "selflabel/errors.hpp"
#include "selflabel/metrics.hpp"
#include "selflabel/rng.hpp"

namespace {

using namespace selflabel;

ScoreSet make_set(const Vector& targets, const Vector& nontargets) {
  ScoreSet s;
  for (double v : targets) {
    s.trials.push_back({"e", "t", true});
    s.scores.push_back(v);
  }
  for (double v : nontargets) {
    s.trials.push_back({"e", "t", false});
    s.scores.push_back(v);
  }
  return s;
}

std::vector<bool> keys_of(const ScoreSet& s) {
  std::vector<bool> k;
  for (const auto& t : s.trials) k.push_back(t.is_target);
  return k;
}

TEST(Nmi, SelfAgreementIsOne) {
  const std::vector<int> a{0, 1, 1, 2, 2, 2};
  EXPECT_EQ(nmi(a, a), 1.0);
}

TEST(Nmi, IndependentLabelingsGiveZero) {
  EXPECT_NEAR(nmi(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1}), 0.0, 1e-15);
}

TEST(Nmi, WorkedExample) {
  const std::vector<int> a{0, 0, 0, 1, 1, 1}, b{0, 0, 1, 1, 1, 1};
  const double v = nmi(a, b);
  EXPECT_NEAR(v, 0.47870397138568001, 1e-10);
  EXPECT_NEAR(v, oracle::nmi(a, b), 1e-10);
  EXPECT_NEAR(v, 0.4786, 2e-4);
}

TEST(Nmi, BothConstantIsOne) {
  EXPECT_EQ(nmi(std::vector<int>{3, 3, 3}, std::vector<int>{1, 1, 1}), 1.0);
}

TEST(Nmi, SymmetricAndRelabelInvariant) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> a(300), b(300);
    for (auto& v : a) v = static_cast<int>(rng.below(7));
    for (auto& v : b) v = static_cast<int>(rng.below(5));
    EXPECT_EQ(nmi(a, b), nmi(b, a));
    std::vector<int> perm{4, 0, 6, 2, 1, 5, 3}, a2(a);
    for (auto& v : a2) v = perm[v] * 10 + 3;
    EXPECT_EQ(nmi(a2, b), nmi(a, b));
    EXPECT_NEAR(nmi(a, b), oracle::nmi(a, b), 1e-10);
  }
}

TEST(Nmi, Errors) {
  EXPECT_THROW(nmi(std::vector<int>{0, 1}, std::vector<int>{0}), ArgumentError);
  EXPECT_THROW(nmi(std::vector<int>{}, std::vector<int>{}), ArgumentError);
}

TEST(Eer, PerfectSeparationIsZero) {
  EXPECT_EQ(eer(make_set({0.9, 0.8}, {0.1, 0.2})).eer, 0.0);
}

TEST(Eer, SweepExample) {
  const ScoreSet s = make_set({0.9, 0.8, 0.3}, {0.7, 0.2, 0.1});
  const auto r = eer(s);
  EXPECT_DOUBLE_EQ(r.eer, 1.0 / 3.0);
  EXPECT_EQ(r.eer, oracle::eer(s.scores, keys_of(s)).eer);
}

TEST(Eer, FlippedKeysNegatedScores) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    ScoreSet s;
    for (int i = 0; i < 40; ++i) {
      const bool t = rng.below(2) == 1;
      s.trials.push_back({"e", "t", t});
      s.scores.push_back(std::round((rng.normal() + (t ? 1.0 : 0.0)) * 100) / 100);
    }
    s.trials[0].is_target = true;
    s.trials[1].is_target = false;
    ScoreSet f = s;
    for (std::size_t i = 0; i < f.size(); ++i) {
      f.trials[i].is_target = !f.trials[i].is_target;
      f.scores[i] = -f.scores[i];
    }
    EXPECT_NEAR(eer(f).eer, oracle::eer(f.scores, keys_of(f)).eer, 1e-12);
    EXPECT_NEAR(eer(f).eer, eer(s).eer, 1e-12);
  }
}

TEST(Eer, SingleClassThrows) {
  EXPECT_THROW(eer(make_set({0.1, 0.2}, {})), ArgumentError);
  EXPECT_THROW(min_dcf(make_set({}, {0.3})), ArgumentError);
}

TEST(Eer, InvariantUnderIncreasingTransform) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    ScoreSet s;
    for (int i = 0; i < 30; ++i) {
      s.trials.push_back({"e", "t", i % 3 == 0});
      s.scores.push_back(rng.normal());
    }
    ScoreSet g = s;
    for (double& v : g.scores) v = std::exp(2.0 * v) + 1.0;
    EXPECT_NEAR(eer(g).eer, eer(s).eer, 1e-12);
    EXPECT_NEAR(min_dcf(g).min_dcf, min_dcf(s).min_dcf, 1e-12);
  }
}

TEST(MinDcf, PerfectSeparationIsZero) {
  EXPECT_EQ(min_dcf(make_set({0.9, 0.8}, {0.1, 0.2})).min_dcf, 0.0);
}

TEST(MinDcf, SweepExample) {
  const ScoreSet s = make_set({0.9, 0.8, 0.3}, {0.7, 0.2, 0.1});
  const auto r = min_dcf(s, DcfParams{0.5, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(r.min_dcf, 1.0 / 3.0);
  EXPECT_GT(r.threshold, 0.7);
  EXPECT_LE(r.threshold, 0.8);
}

TEST(MinDcf, AllScoresIdenticalUsesTrivialPoints) {
  const ScoreSet s = make_set({0.5, 0.5}, {0.5, 0.5, 0.5});
  for (double p : {0.05, 0.3, 0.5, 0.9}) {
    const DcfParams d{p, 1.0, 2.0};
    const double den = std::min(d.c_miss * p, d.c_fa * (1 - p));
    const double expected = std::min({1.0, d.c_miss * p / den, d.c_fa * (1 - p) / den});
    EXPECT_DOUBLE_EQ(min_dcf(s, d).min_dcf, expected);
  }
}

TEST(MinDcf, ParameterValidation) {
  const ScoreSet s = make_set({0.9}, {0.1});
  EXPECT_THROW(min_dcf(s, DcfParams{0.0, 1, 1}), ArgumentError);
  EXPECT_THROW(min_dcf(s, DcfParams{0.5, 0, 1}), ArgumentError);
}

TEST(OperatingPoints, TiesShareAPoint) {
  const auto pts = operating_points(make_set({0.5, 0.5, 0.9}, {0.5, 0.1}));
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_EQ(pts[1].threshold, 0.5);
  EXPECT_DOUBLE_EQ(pts[1].p_fa, 0.5);
  EXPECT_TRUE(std::isinf(pts.back().threshold));
}

}  // namespace
