#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace reflpos {

/// Runs fn(block) for every block in [0, n_blocks) on up to `threads` workers
/// (0 = hardware concurrency). Callers write results into per-block slots and
/// merge them in block order afterwards, so the outcome never depends on the
/// thread count.
template <class Fn>
void for_each_block(std::int64_t n_blocks, unsigned threads, Fn&& fn) {
  if (n_blocks <= 0) return;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::int64_t>(threads, n_blocks));
  if (threads <= 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        for (std::int64_t b = next++; b < n_blocks; b = next++) fn(b);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n_blocks;
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace reflpos
