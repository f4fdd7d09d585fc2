#pragma once

// Fixed-size worker pool over an index range. Results must be written to
// per-index slots so the outcome never depends on scheduling.

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace dtrimer {

inline constexpr const char* kWorkersEnv = "DTRIMER_WORKERS";

// requested > 0 wins, then the DTRIMER_WORKERS environment variable, then the
// hardware concurrency (at least 1).
int resolve_workers(std::optional<int> requested = std::nullopt);

template <class F>
void parallel_for(std::size_t n, int workers, F&& body) {
  if (n == 0) return;
  const std::size_t count = std::min<std::size_t>(n, workers > 0 ? workers : 1);
  if (count <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(count - 1);
  for (std::size_t t = 1; t < count; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace dtrimer
