#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace hcl {

/// Static-partition parallel loop over [0, count). workers == 0 picks the
/// hardware concurrency; workers == 1 runs inline.
inline void parallel_for(long count, const std::function<void(long)>& body,
                         int workers = 0) {
  if (workers == 0)
    workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = static_cast<int>(std::max<long>(1, std::min<long>(workers, count)));
  if (workers <= 1 || count < 2) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  long chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    long lo = w * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (long i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace hcl
