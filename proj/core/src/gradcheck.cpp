// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include <algorithm>
#include <cmath>

#include "selflabel/encoder.hpp"

namespace selflabel {

GradCheckReport grad_check(const Objective& objective, std::span<const double> params,
                           double tolerance, double step, double floor) {
  Vector point(params.begin(), params.end());
  Vector analytic(point.size());
  objective(point, analytic);

  GradCheckReport report;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + step;
    const double up = objective(point, {});
    point[i] = saved - step;
    const double down = objective(point, {});
    point[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    const double err = std::abs(analytic[i] - numeric) / scale;
    if (err > report.max_relative_error || !std::isfinite(err)) {
      report.max_relative_error = err;
      report.worst_index = i;
    }
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace selflabel
