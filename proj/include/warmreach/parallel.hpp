#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace warmreach {

/// Worker count: HJ_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
inline std::size_t worker_count() {
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HJ_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return hw;
}

/// Runs body(begin, end) over contiguous chunks of [0, n). Small ranges and
/// single-worker configurations run inline on the calling thread.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 16384) {
  std::size_t workers = std::min(worker_count(), std::max<std::size_t>(1, n / min_chunk));
  if (workers <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    std::size_t b = w * chunk;
    std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  body(std::size_t{0}, std::min(n, chunk));
}

}  // namespace warmreach
