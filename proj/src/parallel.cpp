#include "stit/parallel.hpp"

namespace stit {

namespace {
std::atomic<int> g_threads{0};
}  // namespace

int default_threads() {
  const int t = g_threads.load();
  if (t > 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_threads(int threads) { g_threads.store(threads); }

}  // namespace stit
