#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace qpush {

inline int default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(chunk) for chunk = 0..nchunks-1 on up to nthreads threads.
// The chunk decomposition is caller-fixed, so any reduction keyed by chunk
// index is reproducible regardless of the thread count.
inline void parallel_for_chunks(int nchunks, int nthreads,
                                const std::function<void(int)>& fn) {
  if (nthreads <= 0) nthreads = default_threads();
  if (nthreads == 1 || nchunks <= 1) {
    for (int c = 0; c < nchunks; ++c) fn(c);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= nchunks) return;
      fn(c);
    }
  };
  std::vector<std::thread> pool;
  const int nt = std::min(nthreads, nchunks);
  pool.reserve(static_cast<std::size_t>(nt));
  for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace qpush
