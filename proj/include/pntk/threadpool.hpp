#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pntk {

inline int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(0..n_jobs-1) on up to `threads` workers. Callers keep results
// deterministic by writing into slot i of a pre-sized container, so the
// merge order never depends on scheduling. The first exception thrown by a
// job is rethrown on the calling thread after all workers drain.
template <typename Fn>
void parallel_for(int n_jobs, int threads, Fn&& fn) {
  if (n_jobs <= 0) return;
  if (threads > n_jobs) threads = n_jobs;
  if (threads <= 1) {
    for (int i = 0; i < n_jobs; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_jobs) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pntk
