// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstddef>
#include <functional>

namespace selflabel {

/// Number of worker threads used when a caller passes 0.
std::size_t default_thread_count();

/// Splits [0, n) into chunks of `chunk_size` and runs `body(chunk_index,
/// begin, end)` for every chunk on up to `threads` workers. Chunk
/// boundaries depend only on `n` and `chunk_size`, never on `threads`, so
/// per-chunk results combined in chunk order are thread-count independent.
void for_each_chunk(std::size_t n, std::size_t chunk_size, std::size_t threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
  return (n + chunk_size - 1) / chunk_size;
}

}  // namespace selflabel
