// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "selflabel/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace selflabel {

std::size_t default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void for_each_chunk(std::size_t n, std::size_t chunk_size, std::size_t threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  if (chunk_size == 0) chunk_size = n;
  const std::size_t chunks = chunk_count(n, chunk_size);
  if (threads == 0) threads = default_thread_count();
  threads = std::min(threads, chunks);

  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * chunk_size;
    body(c, begin, std::min(n, begin + chunk_size));
  };

  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
        try {
          run_chunk(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace selflabel
