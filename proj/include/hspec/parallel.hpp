#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hspec {

inline int default_threads() { return std::max(1, int(std::thread::hardware_concurrency())); }

// Runs fn(i) for i in [0, n) on up to `threads` workers that pull fixed-size
// chunks from a shared counter. Results must be written to per-index slots so
// the outcome does not depend on scheduling.
template <class Fn>
void parallel_for(long n, int threads, Fn&& fn, long chunk = 256) {
  threads = std::max(1, threads);
  if (threads == 1 || n <= chunk) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    try {
      for (;;) {
        const long b = next.fetch_add(chunk);
        if (b >= n) break;
        const long e = std::min(n, b + chunk);
        for (long i = b; i < e; ++i) fn(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!err) err = std::current_exception();
      next = n;
    }
  };
  std::vector<std::thread> pool;
  const int t = int(std::min<long>(threads, (n + chunk - 1) / chunk));
  for (int i = 1; i < t; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace hspec
