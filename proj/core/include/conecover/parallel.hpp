#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace conecover {

// Worker cap: CONECOVER_THREADS if set, else hardware concurrency.
inline int effective_threads() {
  if (const char* env = std::getenv("CONECOVER_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Evaluates fn(i) for i in [0, n) on up to effective_threads() workers and
// stores results in index order. Reductions over the returned vector must be
// done sequentially by the caller so output is bitwise independent of the
// worker count.
template <typename T>
std::vector<T> parallel_index_map(std::int64_t n, const std::function<T(int worker, std::int64_t i)>& fn,
                                  int max_threads = -1) {
  std::vector<T> out(static_cast<std::size_t>(n));
  int threads = max_threads > 0 ? max_threads : effective_threads();
  threads = static_cast<int>(std::min<std::int64_t>(threads, std::max<std::int64_t>(n, 1)));
  if (threads <= 1) {
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(0, i);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::int64_t i = w; i < n; i += threads) out[static_cast<std::size_t>(i)] = fn(w, i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace conecover
