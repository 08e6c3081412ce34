#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace cvp {

// Static partition of [begin, end) into contiguous chunks, one per worker.
// Output cells must be written by exactly one index so results are
// bit-identical for any worker count.
inline void parallel_for(int begin, int end, int num_threads,
                         const std::function<void(int)>& body) {
  const int n = end - begin;
  if (n <= 0) return;
  if (num_threads <= 0)
    num_threads = static_cast<int>(std::thread::hardware_concurrency());
  num_threads = std::clamp(num_threads, 1, n);
  if (num_threads == 1) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(num_threads);
  const int chunk = (n + num_threads - 1) / num_threads;
  for (int t = 0; t < num_threads; ++t) {
    const int lo = begin + t * chunk;
    const int hi = std::min(lo + chunk, end);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace cvp
