// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "selflabel/assignment.hpp"
#include "selflabel/matrix.hpp"

namespace selflabel {

/// K centroids of dimension d. Row l is the centroid of cluster l.
struct CentroidMatrix {
  Matrix centroids;
  std::size_t k() const { return centroids.rows(); }
};

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iters = 100;
  std::uint64_t seed = 1;
  /// Worker threads for the assignment step; 0 = hardware concurrency.
  /// Results do not depend on this value.
  std::size_t threads = 0;
};

struct KMeansResult {
  CentroidMatrix centroids;
  Assignment assignment;
  double wss = 0.0;
  /// W after seeding and after every Lloyd step of the winning restart.
  std::vector<double> wss_trace;
  /// Same trace for every restart, in restart order.
  std::vector<std::vector<double>> restart_traces;
  std::size_t best_restart = 0;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` by final W.
/// Iteration stops when the assignment no longer changes or after
/// max_iters steps. A cluster that empties is re-seeded at the point
/// farthest from its own centroid. Throws ArgumentError when k == 0,
/// k > rows or X is not finite.
KMeansResult kmeans(const Matrix& x, std::size_t k, const KMeansOptions& options = {});

/// Sum over samples of squared Euclidean distance to the assigned centroid,
/// accumulated in sample order.
double wss(const Matrix& x, const CentroidMatrix& centroids, const Assignment& assignment);

struct WssCurve {
  std::vector<std::size_t> ks;
  std::vector<double> wss;
  void validate() const;
};

/// One best-of-restarts k-means per grid value. Every grid value reuses
/// `options.seed`.
WssCurve sweep_k(const Matrix& x, std::span<const std::size_t> k_grid,
                 const KMeansOptions& options = {});

struct ElbowSelection {
  std::size_t k = 0;
  /// Per grid point: perpendicular distance to the chord joining the first
  /// and last points, after min-max normalising both axes.
  Vector knee_scores;
};

/// Picks the grid value with the largest knee score; near-ties (within
/// 1e-12) go to the smallest K. Throws ArgumentError for curves shorter
/// than 3 points.
ElbowSelection select_k_elbow(const WssCurve& curve);

/// Scales every row to unit Euclidean norm. Throws NumericError on a zero row.
Matrix normalize_rows(Matrix x);

}  // namespace selflabel
