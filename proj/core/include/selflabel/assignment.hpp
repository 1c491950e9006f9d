// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstddef>
#include <vector>

namespace selflabel {

/// One cluster label in [0, k) per sample, in canonical corpus order.
/// This is the pseudo-label object handed between stages.
struct Assignment {
  std::vector<int> labels;
  std::size_t k = 0;

  std::size_t size() const noexcept { return labels.size(); }
  /// Throws ArgumentError if any label lies outside [0, k).
  void validate() const;
  /// Number of label values that actually occur.
  std::size_t distinct_labels() const;

  bool operator==(const Assignment&) const = default;
};

}  // namespace selflabel
