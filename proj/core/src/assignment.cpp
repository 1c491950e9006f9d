// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "selflabel/assignment.hpp"

#include <string>

#include "selflabel/errors.hpp"

namespace selflabel {

void Assignment::validate() const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k)
      throw ArgumentError("label " + std::to_string(labels[i]) + " at position " + std::to_string(i) +
                          " outside [0, " + std::to_string(k) + ")");
}

std::size_t Assignment::distinct_labels() const {
  std::vector<char> seen(k, 0);
  std::size_t count = 0;
  for (const int l : labels)
    if (l >= 0 && static_cast<std::size_t>(l) < k && !seen[static_cast<std::size_t>(l)]) {
      seen[static_cast<std::size_t>(l)] = 1;
      ++count;
    }
  return count;
}

}  // namespace selflabel
