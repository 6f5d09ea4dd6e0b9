#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ruin {

/// Number of workers to use when the caller passes 0.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, n) into fixed chunks, evaluates `body(begin, end)` for each chunk
/// on a pool of workers pulling chunk indices from a shared counter, then
/// folds the per-chunk results in chunk order. The result depends only on n
/// and chunk, never on the number of threads or the schedule.
template <class Acc, class Body, class Merge>
Acc parallel_reduce(std::uint64_t n, std::uint64_t chunk, unsigned threads, Body body, Merge merge, Acc init = Acc{}) {
  if (n == 0) return init;
  chunk = std::max<std::uint64_t>(1, chunk);
  const std::uint64_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<Acc> partial(n_chunks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        const std::uint64_t begin = c * chunk;
        partial[c] = body(begin, std::min(n, begin + chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_chunks);
      }
    }
  };

  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(threads), n_chunks));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  Acc acc = std::move(init);
  for (auto& p : partial) acc = merge(std::move(acc), std::move(p));
  return acc;
}

}  // namespace ruin
