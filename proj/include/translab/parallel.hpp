#pragma once

// Chunked parallel loop over node indices. Worker count is capped by the
// TRANSLATOR_LAB_THREADS environment variable. Only pure per-index writes
// go through here; reductions stay sequential so results do not depend on
// the thread count.

#include <Eigen/Core>

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace translab {

inline int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* cap = std::getenv("TRANSLATOR_LAB_THREADS")) {
    const int limit = std::atoi(cap);
    if (limit >= 1) n = std::min(n, limit);
  }
  return n;
}

template <typename Fn>
void parallel_for(Eigen::Index begin, Eigen::Index end, const Fn& fn,
                  Eigen::Index grain = 2048) {
  const Eigen::Index count = end - begin;
  const int workers =
      std::min<Eigen::Index>(worker_count(), std::max<Eigen::Index>(1, count / grain));
  if (workers <= 1) {
    for (Eigen::Index i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const Eigen::Index chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const Eigen::Index b = begin + w * chunk;
    const Eigen::Index e = std::min(end, b + chunk);
    if (b >= e) break;
    pool.emplace_back([b, e, &fn] {
      for (Eigen::Index i = b; i < e; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace translab
