// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

// Deliberately naive reference implementations. They share no code with
// the library beyond plain data types.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

// NMI with arithmetic-mean normalization from an explicit contingency
// table, long double accumulation.
inline double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> la(a), lb(b);
  std::sort(la.begin(), la.end());
  la.erase(std::unique(la.begin(), la.end()), la.end());
  std::sort(lb.begin(), lb.end());
  lb.erase(std::unique(lb.begin(), lb.end()), lb.end());
  std::vector<std::vector<long double>> table(la.size(), std::vector<long double>(lb.size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto r = std::lower_bound(la.begin(), la.end(), a[i]) - la.begin();
    const auto c = std::lower_bound(lb.begin(), lb.end(), b[i]) - lb.begin();
    table[r][c] += 1;
  }
  const long double n = static_cast<long double>(a.size());
  std::vector<long double> row(la.size(), 0), col(lb.size(), 0);
  for (std::size_t r = 0; r < la.size(); ++r)
    for (std::size_t c = 0; c < lb.size(); ++c) {
      row[r] += table[r][c];
      col[c] += table[r][c];
    }
  long double ha = 0, hb = 0, mi = 0;
  for (auto v : row) ha -= v / n * std::log(v / n);
  for (auto v : col) hb -= v / n * std::log(v / n);
  for (std::size_t r = 0; r < la.size(); ++r)
    for (std::size_t c = 0; c < lb.size(); ++c)
      if (table[r][c] > 0) mi += table[r][c] / n * std::log(table[r][c] * n / (row[r] * col[c]));
  if (ha + hb == 0) return 1.0;
  return static_cast<double>(2 * mi / (ha + hb));
}

struct SweepPoint {
  double threshold;
  double p_miss;
  double p_fa;
};

// Every distinct score plus +inf; counts recomputed from scratch per point.
inline std::vector<SweepPoint> sweep(const std::vector<double>& scores, const std::vector<bool>& target) {
  std::vector<double> thresholds(scores);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());
  const auto nt = static_cast<double>(std::count(target.begin(), target.end(), true));
  const auto nn = static_cast<double>(target.size()) - nt;
  std::vector<SweepPoint> out;
  for (double th : thresholds) {
    std::size_t miss = 0, fa = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (target[i] && scores[i] < th) ++miss;
      if (!target[i] && scores[i] >= th) ++fa;
    }
    out.push_back({th, static_cast<double>(miss) / nt, static_cast<double>(fa) / nn});
  }
  return out;
}

struct EerOracle {
  double eer;
  bool at_operating_point;
};

// Crossing of P_miss and P_fa on the staircase; between two points the
// crossing of the straight segment with the diagonal.
inline EerOracle eer(const std::vector<double>& scores, const std::vector<bool>& target) {
  const auto pts = sweep(scores, target);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].p_miss < pts[i].p_fa) continue;
    if (pts[i].p_miss == pts[i].p_fa || i == 0) return {pts[i].p_fa, true};
    const auto& a = pts[i - 1];
    const auto& b = pts[i];
    // Solve a + t (b - a) on the line p_miss = p_fa.
    const double t = (a.p_fa - a.p_miss) / ((b.p_miss - a.p_miss) - (b.p_fa - a.p_fa));
    return {a.p_miss + t * (b.p_miss - a.p_miss), false};
  }
  return {1.0, true};
}

inline double min_dcf(const std::vector<double>& scores, const std::vector<bool>& target, double p_target,
                      double c_miss, double c_fa) {
  double best = std::numeric_limits<double>::infinity();
  const double norm = std::min(c_miss * p_target, c_fa * (1 - p_target));
  for (const auto& p : sweep(scores, target))
    best = std::min(best, (c_miss * p_target * p.p_miss + c_fa * (1 - p_target) * p.p_fa) / norm);
  return best;
}

// Maximum of sum_l omega[l][perm[l]] over every permutation.
inline std::int64_t best_permutation_objective(const std::vector<std::vector<std::int64_t>>& omega) {
  std::vector<std::size_t> perm(omega.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::int64_t best = std::numeric_limits<std::int64_t>::min();
  do {
    std::int64_t s = 0;
    for (std::size_t r = 0; r < perm.size(); ++r) s += omega[r][perm[r]];
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  return dot(a, b) / std::sqrt(dot(a, a) * dot(b, b));
}

// Contrastive loss written straight from its definition: z[i][j] is view j
// of sample i; the denominator of anchor (i, j) runs over (k, l) with
// k != i and l != j, or over every (k, l) != (i, j) when `simclr`.
inline double contrastive_loss(const std::vector<std::vector<std::vector<double>>>& z, double tau,
                               bool simclr = false) {
  const std::size_t m = z.size();
  double total = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      const double num = std::exp(cosine(z[i][0], z[i][1]) / tau);
      double den = 0;
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < 2; ++l) {
          const bool use = simclr ? !(k == i && l == j) : (k != i && l != j);
          if (use) den += std::exp(cosine(z[i][j], z[k][l]) / tau);
        }
      total += -std::log(num / den);
    }
  return total / (2.0 * static_cast<double>(m));
}

}  // namespace oracle
