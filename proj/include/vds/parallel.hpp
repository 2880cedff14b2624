#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace vds {

/// Run fn(k) for k in [0, n) on up to `workers` threads. Each index is
/// handled exactly once; callers write results into slot k so the output
/// order never depends on scheduling. The exception from the lowest failing
/// index is rethrown after all threads join.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& fn) {
  const unsigned w = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(workers, n)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (w <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (unsigned t = 0; t < w; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace vds
