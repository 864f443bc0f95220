#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace stit {

// Worker count used when a caller passes threads <= 0. Defaults to the
// hardware concurrency.
int default_threads();
void set_default_threads(int threads);

/// Evaluates f(0), ..., f(n-1) on a pool of threads and returns the results
/// in index order. f must only touch its own replicate (e.g. build its
/// RandomStream from the index), which makes the output independent of the
/// thread count. The first exception thrown by any f is rethrown.
template <class F>
auto parallel_map(std::size_t n, int threads, F f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  static_assert(!std::is_same_v<R, bool>, "std::vector<bool> is not safe for concurrent writes");
  std::vector<R> out(n);
  if (threads <= 0) threads = default_threads();
  threads = static_cast<int>(std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < threads; ++k) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace stit
