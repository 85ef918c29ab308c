#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace flowforest {

inline unsigned effective_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Runs fn(i) for i in [begin, end). Work items are claimed through a shared
/// atomic counter; outputs must go to per-index slots so the schedule cannot
/// affect the result. The first exception thrown by any worker is rethrown
/// on the calling thread after all workers join.
template <typename Fn>
void parallel_for(size_t begin, size_t end, unsigned threads, Fn&& fn) {
  if (begin >= end) return;
  const size_t count = end - begin;
  const unsigned n_threads = std::min<size_t>(effective_threads(threads), count);
  if (n_threads <= 1) {
    for (size_t i = begin; i < end; ++i) fn(i);
    return;
  }

  std::atomic<size_t> next{begin};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= end) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace flowforest
