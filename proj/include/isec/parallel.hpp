#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace isec {

/// Number of worker threads for internal scans: hardware concurrency capped
/// by the ISEC_THREADS environment variable. Always at least 1.
inline std::size_t thread_budget() {
  std::size_t n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("ISEC_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0 && static_cast<std::size_t>(cap) < n)
      n = static_cast<std::size_t>(cap);
  }
  return n;
}

/// Runs body(chunk_begin, chunk_end, chunk_index) over [0, n) split into
/// contiguous chunks, one per worker. Results must be combined by the caller
/// in chunk-index order so the outcome is independent of the partitioning.
template <class Body>
void parallel_chunks(std::size_t n, std::size_t n_chunks, Body&& body) {
  if (n == 0) return;
  if (n_chunks <= 1 || n < 2 * n_chunks) {
    body(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(n_chunks);
  const std::size_t step = (n + n_chunks - 1) / n_chunks;
  std::size_t chunk = 0;
  for (std::size_t begin = 0; begin < n; begin += step, ++chunk) {
    const std::size_t end = std::min(n, begin + step);
    workers.emplace_back([&body, begin, end, chunk] { body(begin, end, chunk); });
  }
  for (auto& w : workers) w.join();
}

}  // namespace isec
