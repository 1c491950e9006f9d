// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include <limits>

#include "selflabel/ensemble.hpp"
#include "selflabel/errors.hpp"

namespace selflabel {

// Shortest augmenting path formulation with row/column potentials,
// 1-based internally; column 0 is the virtual source.
std::vector<int> hungarian_min_cost(const std::vector<std::int64_t>& cost, std::size_t n,
                                    std::int64_t* total_cost) {
  if (cost.size() != n * n) throw ArgumentError("cost matrix is not n x n");
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);

  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<std::int64_t> min_slack(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t r0 = match[col0];
      std::int64_t delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const std::int64_t slack = cost[(r0 - 1) * n + (col - 1)] - u[r0] - v[col];
        if (slack < min_slack[col]) {
          min_slack[col] = slack;
          way[col] = col0;
        }
        if (min_slack[col] < delta) {
          delta = min_slack[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          min_slack[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  std::int64_t total = 0;
  for (std::size_t col = 1; col <= n; ++col) {
    row_to_col[match[col] - 1] = static_cast<int>(col - 1);
    total += cost[(match[col] - 1) * n + (col - 1)];
  }
  if (total_cost) *total_cost = total;
  return row_to_col;
}

}  // namespace selflabel
