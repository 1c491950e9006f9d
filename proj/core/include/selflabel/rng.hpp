// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace selflabel {

/// Seeded generator whose output sequence is fixed by the C++ standard
/// (mt19937_64) and whose derived distributions are computed here rather
/// than through the implementation-defined <random> distributions, so
/// results are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double low, double high) { return low + (high - low) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  void shuffle(std::span<std::size_t> items);

  bool operator==(const Rng&) const = default;

 private:
  std::mt19937_64 engine_;
};

/// Deterministically derives an independent seed for a named sub-stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

std::vector<std::size_t> iota_indices(std::size_t n);

}  // namespace selflabel
