#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace sheetlab {

// Evaluates fn(i) for i in [0, n) into a slot array indexed by i. Chunks are
// claimed dynamically, but every result lands in its own slot and callers
// reduce the array sequentially, so the outcome is independent of the thread
// count and of scheduling.
template <typename Result, typename Fn>
std::vector<Result> run_trials(std::int64_t n, int threads, Fn&& fn) {
  std::vector<Result> out(static_cast<std::size_t>(n > 0 ? n : 0));
  if (n <= 0) return out;
  if (threads <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  const std::int64_t chunk = std::max<std::int64_t>(1, n / (8 * threads));
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t lo = next.fetch_add(chunk);
      if (lo >= n) return;
      const std::int64_t hi = std::min(n, lo + chunk);
      for (std::int64_t i = lo; i < hi; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace sheetlab
