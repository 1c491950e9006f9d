// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "selflabel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "selflabel/errors.hpp"

namespace selflabel {
namespace {

// Sums terms in sorted order so the result does not depend on the order
// the terms were produced in.
double canonical_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

double entropy_of(const std::map<int, std::size_t>& counts, double n) {
  std::vector<double> terms;
  terms.reserve(counts.size());
  for (const auto& [label, c] : counts) {
    const double p = static_cast<double>(c) / n;
    terms.push_back(p * std::log(n / static_cast<double>(c)));
  }
  return canonical_sum(std::move(terms));
}

}  // namespace

double nmi(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw ArgumentError("NMI needs equal-length labelings (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  if (a.empty()) throw ArgumentError("NMI of empty labelings");
  std::map<int, std::size_t> count_a, count_b;
  std::map<std::pair<int, int>, std::size_t> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++count_a[a[i]];
    ++count_b[b[i]];
    ++joint[{a[i], b[i]}];
  }
  const double n = static_cast<double>(a.size());
  const double h_a = entropy_of(count_a, n);
  const double h_b = entropy_of(count_b, n);
  if (h_a + h_b == 0.0) return 1.0;

  std::vector<double> terms;
  terms.reserve(joint.size());
  for (const auto& [cell, c] : joint) {
    const double nij = static_cast<double>(c);
    const double ai = static_cast<double>(count_a[cell.first]);
    const double bj = static_cast<double>(count_b[cell.second]);
    terms.push_back(nij / n * std::log((n * nij) / (ai * bj)));
  }
  const double mi = canonical_sum(std::move(terms));
  return std::clamp(2.0 * mi / (h_a + h_b), 0.0, 1.0);
}

std::vector<OperatingPoint> operating_points(const ScoreSet& scores) {
  scores.validate();
  std::vector<std::pair<double, bool>> sorted;
  sorted.reserve(scores.size());
  std::size_t targets = 0;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    sorted.emplace_back(scores.scores[t], scores.trials[t].is_target);
    targets += scores.trials[t].is_target;
  }
  const std::size_t nontargets = scores.size() - targets;
  if (targets == 0 || nontargets == 0)
    throw ArgumentError("error rates need both target and nontarget trials");
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  std::vector<OperatingPoint> points;
  std::size_t targets_below = 0, nontargets_below = 0;
  const double nt = static_cast<double>(targets), nn = static_cast<double>(nontargets);
  for (std::size_t i = 0; i < sorted.size();) {
    const double threshold = sorted[i].first;
    points.push_back({threshold, static_cast<double>(targets_below) / nt,
                      static_cast<double>(nontargets - nontargets_below) / nn});
    for (; i < sorted.size() && sorted[i].first == threshold; ++i)
      (sorted[i].second ? targets_below : nontargets_below) += 1;
  }
  points.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0});
  return points;
}

EerResult eer(const ScoreSet& scores) {
  const auto points = operating_points(scores);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const OperatingPoint& p = points[i];
    if (p.p_miss < p.p_fa) continue;
    if (p.p_miss == p.p_fa || i == 0) return {p.p_fa, p.threshold};
    const OperatingPoint& prev = points[i - 1];
    const double gap_prev = prev.p_fa - prev.p_miss;  // > 0
    const double gap_here = p.p_fa - p.p_miss;        // < 0
    const double lambda = gap_prev / (gap_prev - gap_here);
    const double rate = prev.p_fa + lambda * (p.p_fa - prev.p_fa);
    const double threshold = std::isinf(p.threshold)
                                 ? prev.threshold
                                 : prev.threshold + lambda * (p.threshold - prev.threshold);
    return {rate, threshold};
  }
  return {points.back().p_fa, points.back().threshold};  // unreachable: last point has p_miss = 1
}

void DcfParams::validate() const {
  if (!(p_target > 0.0 && p_target < 1.0)) throw ArgumentError("p_target must lie in (0, 1)");
  if (!(c_miss > 0.0) || !(c_fa > 0.0)) throw ArgumentError("DCF costs must be positive");
}

DcfResult min_dcf(const ScoreSet& scores, const DcfParams& params) {
  params.validate();
  const auto points = operating_points(scores);
  const double miss_weight = params.c_miss * params.p_target;
  const double fa_weight = params.c_fa * (1.0 - params.p_target);
  const double norm = std::min(miss_weight, fa_weight);
  DcfResult best{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& p : points) {
    const double cost = (miss_weight * p.p_miss + fa_weight * p.p_fa) / norm;
    if (cost <= best.min_dcf) best = {cost, p.threshold};
  }
  return best;
}

}  // namespace selflabel
