// SPDX-License-Identifier: Apache-2.0

#ifndef HASHPOINT_PARALLEL_HPP
#define HASHPOINT_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hashpoint {

/// Thread cap from HASHPOINT_THREADS; `fallback` when unset or invalid.
unsigned threads_from_env(unsigned fallback = 1);

/// Runs body(begin, end) over contiguous chunks of [0, n). With threads <= 1
/// everything runs on the calling thread. The first exception thrown by any
/// chunk is rethrown after all workers join.
template <typename Body>
void parallel_for_chunks(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace hashpoint

#endif  // HASHPOINT_PARALLEL_HPP
