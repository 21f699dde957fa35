// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hdrlpa {

/// Worker count from HDRLPA_THREADS, else the hardware concurrency.
inline int default_thread_count() {
  if (const char* env = std::getenv("HDRLPA_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs body(row) for every row in [0, rows). Rows are handed out in chunks
/// from a shared counter; each row is processed exactly once, so results are
/// independent of the worker count as long as rows write disjoint outputs.
template <class Body>
void parallel_for_rows(int rows, int threads, Body&& body) {
  if (threads <= 0) threads = default_thread_count();
  threads = std::min(threads, std::max(rows, 1));
  if (threads <= 1) {
    for (int r = 0; r < rows; ++r) body(r);
    return;
  }
  constexpr int kChunk = 4;
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    try {
      for (;;) {
        const int start = next.fetch_add(kChunk);
        if (start >= rows) break;
        const int stop = std::min(rows, start + kChunk);
        for (int r = start; r < stop; ++r) body(r);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(rows);
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(threads - 1));
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace hdrlpa
