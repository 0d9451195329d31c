#include "reacfuse/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace reacfuse {

namespace {
int g_threads = 1;
}

int worker_threads() { return g_threads; }

void set_worker_threads(int n) { g_threads = n < 1 ? 1 : n; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const int nt = g_threads;
  if (nt <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int spawn = nt - 1;
  if (static_cast<std::size_t>(spawn) > n) spawn = static_cast<int>(n);
  pool.reserve(static_cast<std::size_t>(spawn));
  for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace reacfuse
