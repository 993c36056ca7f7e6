#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace hjt {

// Process-wide worker count used by the node-parallel loops. 1 by default.
void set_thread_count(int n);
int thread_count();

// Calls body(i) for every i in [0, n). Each index is visited by exactly one
// thread and body must only write state owned by index i, so results are
// bit-identical to the sequential loop.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, thread_count()));
  if (workers == 1 || n < 2 * workers) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
}

}  // namespace hjt
