#pragma once

// Chunked parallel-for over an index range. Bodies write disjoint slots, so
// results do not depend on the worker count or the partition.

#include <cstdint>
#include <thread>
#include <vector>

namespace hjb {

inline int default_workers() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

template <class F>
void parallel_for(int64_t n, int workers, F&& body) {
  if (workers <= 0) workers = default_workers();
  if (workers == 1 || n < 128) {
    for (int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  const int64_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int64_t b = w * chunk;
    const int64_t e = std::min(n, b + chunk);
    if (b >= e) break;
    threads.emplace_back([b, e, &body] {
      for (int64_t i = b; i < e; ++i) body(i);
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace hjb
