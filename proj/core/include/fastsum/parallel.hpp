#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace fastsum {

//! Fork-join over [0, n): worker w owns the contiguous index block
//! [w*n/threads, (w+1)*n/threads). Each index is owned by exactly one worker,
//! so any per-index accumulation is independent of the worker count.
template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
  if (threads < 1) threads = 1;
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const auto t = static_cast<std::size_t>(threads);
  std::vector<std::thread> pool;
  pool.reserve(t - 1);
  auto run = [&body, n, t](std::size_t w) {
    const std::size_t lo = w * n / t;
    const std::size_t hi = (w + 1) * n / t;
    for (std::size_t i = lo; i < hi; ++i) body(i);
  };
  for (std::size_t w = 1; w < t; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& th : pool) th.join();
}

}  // namespace fastsum
