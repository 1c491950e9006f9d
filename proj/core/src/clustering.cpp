// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "selflabel/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "selflabel/errors.hpp"
#include "selflabel/parallel.hpp"
#include "selflabel/rng.hpp"

namespace selflabel {
namespace {

constexpr std::size_t kChunk = 256;

// Per-chunk sums of member rows, combined in chunk order by the caller.
struct PartialSums {
  Matrix sums;
  std::vector<std::size_t> counts;
};

bool assign_points(const Matrix& x, const Matrix& centroids, std::vector<int>& labels,
                   std::vector<PartialSums>& partials, std::size_t threads) {
  const std::size_t k = centroids.rows();
  const std::size_t d = x.cols();
  std::vector<char> chunk_changed(chunk_count(x.rows(), kChunk), 0);
  for_each_chunk(x.rows(), kChunk, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    PartialSums& p = partials[c];
    std::fill(p.sums.values().begin(), p.sums.values().end(), 0.0);
    std::fill(p.counts.begin(), p.counts.end(), 0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = x.row(i);
      std::size_t best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < k; ++l) {
        const double dist = squared_distance(row, centroids.row(l));
        if (dist < best_dist) {
          best_dist = dist;
          best = l;
        }
      }
      if (labels[i] != static_cast<int>(best)) {
        labels[i] = static_cast<int>(best);
        chunk_changed[c] = 1;
      }
      auto sum = p.sums.row(best);
      for (std::size_t j = 0; j < d; ++j) sum[j] += row[j];
      ++p.counts[best];
    }
  });
  return std::any_of(chunk_changed.begin(), chunk_changed.end(), [](char v) { return v != 0; });
}

void update_centroids(const Matrix& x, const std::vector<int>& labels,
                      const std::vector<PartialSums>& partials, Matrix& centroids) {
  const std::size_t k = centroids.rows();
  const std::size_t d = centroids.cols();
  Matrix sums(k, d);
  std::vector<std::size_t> counts(k, 0);
  for (const auto& p : partials) {
    for (std::size_t v = 0; v < sums.size(); ++v) sums.values()[v] += p.sums.values()[v];
    for (std::size_t l = 0; l < k; ++l) counts[l] += p.counts[l];
  }
  std::vector<std::size_t> empty;
  for (std::size_t l = 0; l < k; ++l) {
    if (counts[l] == 0) {
      empty.push_back(l);
      continue;
    }
    const double inv = 1.0 / static_cast<double>(counts[l]);
    for (std::size_t j = 0; j < d; ++j) centroids(l, j) = sums(l, j) * inv;
  }
  if (empty.empty()) return;

  // Re-seed each empty cluster at the point farthest from its own centroid.
  Vector dist(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    dist[i] = squared_distance(x.row(i), centroids.row(static_cast<std::size_t>(labels[i])));
  for (const std::size_t l : empty) {
    const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
    std::copy(x.row(far).begin(), x.row(far).end(), centroids.row(l).begin());
    dist[far] = -1.0;
  }
}

Matrix kmeans_plus_plus(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix centroids(k, x.cols());
  auto place = [&](std::size_t l, std::size_t i) {
    std::copy(x.row(i).begin(), x.row(i).end(), centroids.row(l).begin());
  };
  place(0, static_cast<std::size_t>(rng.below(n)));
  Vector nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(x.row(i), centroids.row(0));
  for (std::size_t l = 1; l < k; ++l) {
    double total = 0.0;
    for (double v : nearest) total += v;
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc > target && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
      // Rounding can leave target past the last positive weight.
      if (nearest[pick] == 0.0)
        for (std::size_t i = n; i-- > 0;)
          if (nearest[i] > 0.0) {
            pick = i;
            break;
          }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    place(l, pick);
    for (std::size_t i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], squared_distance(x.row(i), centroids.row(l)));
  }
  return centroids;
}

}  // namespace

double wss(const Matrix& x, const CentroidMatrix& centroids, const Assignment& assignment) {
  if (assignment.size() != x.rows()) throw ArgumentError("assignment length does not match rows");
  if (centroids.centroids.cols() != x.cols()) throw ArgumentError("centroid dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const int label = assignment.labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= centroids.k())
      throw ArgumentError("label " + std::to_string(label) + " outside [0, " +
                          std::to_string(centroids.k()) + ")");
    total += squared_distance(x.row(i), centroids.centroids.row(static_cast<std::size_t>(label)));
  }
  return total;
}

KMeansResult kmeans(const Matrix& x, std::size_t k, const KMeansOptions& options) {
  const std::size_t n = x.rows();
  if (k == 0) throw ArgumentError("k-means needs K >= 1");
  if (k > n)
    throw ArgumentError("k-means with K = " + std::to_string(k) + " > N = " + std::to_string(n));
  if (!all_finite(x.values())) throw ArgumentError("k-means input contains non-finite values");
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);

  KMeansResult best;
  best.wss = std::numeric_limits<double>::infinity();
  std::vector<PartialSums> partials(chunk_count(n, kChunk), PartialSums{Matrix(k, x.cols()),
                                                                       std::vector<std::size_t>(k)});
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(options.seed, r));
    Matrix centroids = kmeans_plus_plus(x, k, rng);
    std::vector<int> labels(n, -1);
    assign_points(x, centroids, labels, partials, options.threads);

    Assignment assignment{labels, k};
    std::vector<double> trace{wss(x, {centroids}, assignment)};
    std::size_t iterations = 0;
    while (iterations < options.max_iters) {
      ++iterations;
      update_centroids(x, labels, partials, centroids);
      const bool changed = assign_points(x, centroids, labels, partials, options.threads);
      assignment.labels = labels;
      trace.push_back(wss(x, {centroids}, assignment));
      if (!changed) break;
    }

    const double w = trace.back();
    best.restart_traces.push_back(trace);
    if (w < best.wss) {
      best.wss = w;
      best.centroids = {std::move(centroids)};
      best.assignment = std::move(assignment);
      best.wss_trace = std::move(trace);
      best.best_restart = r;
      best.iterations = iterations;
    }
  }
  return best;
}

void WssCurve::validate() const {
  if (ks.size() != wss.size()) throw ArgumentError("WSS curve has mismatched column lengths");
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (ks[i] <= ks[i - 1]) throw ArgumentError("WSS curve K values must be strictly ascending");
  for (double w : wss)
    if (!(w >= 0.0)) throw ArgumentError("WSS values must be non-negative");
}

WssCurve sweep_k(const Matrix& x, std::span<const std::size_t> k_grid, const KMeansOptions& options) {
  WssCurve curve;
  for (const std::size_t k : k_grid) {
    if (!curve.ks.empty() && k <= curve.ks.back())
      throw ArgumentError("k grid must be strictly ascending");
    curve.ks.push_back(k);
    curve.wss.push_back(kmeans(x, k, options).wss);
  }
  return curve;
}

ElbowSelection select_k_elbow(const WssCurve& curve) {
  curve.validate();
  const std::size_t n = curve.ks.size();
  if (n < 3) throw ArgumentError("elbow selection needs at least 3 curve points");

  const double k0 = static_cast<double>(curve.ks.front());
  const double k_span = static_cast<double>(curve.ks.back()) - k0;
  const auto [w_min_it, w_max_it] = std::minmax_element(curve.wss.begin(), curve.wss.end());
  const double w_min = *w_min_it;
  const double w_span = *w_max_it - w_min;

  Vector xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = (static_cast<double>(curve.ks[i]) - k0) / k_span;
    ys[i] = w_span > 0.0 ? (curve.wss[i] - w_min) / w_span : 0.0;
  }
  const double dx = xs[n - 1] - xs[0];
  const double dy = ys[n - 1] - ys[0];
  const double chord = std::hypot(dx, dy);

  ElbowSelection out{curve.ks.front(), Vector(n, 0.0)};
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.knee_scores[i] = std::abs(dx * (ys[i] - ys[0]) - dy * (xs[i] - xs[0])) / chord;
    best = std::max(best, out.knee_scores[i]);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (out.knee_scores[i] >= best - 1e-12) {
      out.k = curve.ks[i];
      break;
    }
  return out;
}

Matrix normalize_rows(Matrix x) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    const double n = norm(row);
    if (!(n > 0.0)) throw NumericError("cannot normalise zero row " + std::to_string(i));
    for (double& v : row) v /= n;
  }
  return x;
}

}  // namespace selflabel
