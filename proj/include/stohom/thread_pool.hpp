#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace stohom {

/**
 * @brief Run body(i) for i in [0, n) on up to `threads` workers.
 *
 * Each index is claimed exactly once from a shared counter; the body must
 * write only to state owned by its index, which makes the aggregate result
 * independent of the thread count and of scheduling. The first exception
 * thrown by any body is rethrown on the caller after all workers join.
 */
inline void parallel_for(int threads, std::int64_t n,
                         const std::function<void(std::int64_t)>& body) {
  if (n <= 0) return;
  if (threads < 1) throw std::invalid_argument("parallel_for: thread count must be positive");
  const int workers = static_cast<int>(std::min<std::int64_t>(threads, n));
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace stohom
