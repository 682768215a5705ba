#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace wprg {

enum class RunMode { Reproducible, Fast };

/// Splits [0, n) into a fixed number of chunks and reduces chunk results in
/// chunk order, so the result does not depend on the worker count. Fast mode
/// runs chunks on threads; reproducible mode runs them sequentially.
template <typename Acc, typename ChunkFn, typename CombineFn>
Acc chunked_reduce(uint64_t n, Acc init, ChunkFn chunk_fn, CombineFn combine,
                   RunMode mode = RunMode::Fast, int chunks = 64) {
  if (n == 0) return init;
  if (static_cast<uint64_t>(chunks) > n) chunks = static_cast<int>(n);
  std::vector<Acc> partial(chunks, init);
  auto run_chunk = [&](int c) {
    uint64_t lo = n * c / chunks;
    uint64_t hi = n * (c + 1) / chunks;
    partial[c] = chunk_fn(lo, hi, init);
  };
  unsigned hw = std::thread::hardware_concurrency();
  if (mode == RunMode::Fast && hw > 1) {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (unsigned t = 0; t < hw; ++t)
      pool.emplace_back([&] {
        for (int c; (c = next.fetch_add(1)) < chunks;) run_chunk(c);
      });
    for (auto& th : pool) th.join();
  } else {
    for (int c = 0; c < chunks; ++c) run_chunk(c);
  }
  Acc acc = init;
  for (int c = 0; c < chunks; ++c) acc = combine(acc, partial[c]);
  return acc;
}

}  // namespace wprg
