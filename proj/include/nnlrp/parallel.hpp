#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "nnlrp/tensor.hpp"

namespace nnlrp {

/// Worker count for parallel sections: hardware concurrency, capped by the
/// NNLRP_THREADS environment variable when it is set to a positive integer.
inline int workerCount() {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (const char* env = std::getenv("NNLRP_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1 && cap < workers) workers = cap;
  }
  return workers;
}

/// Runs body(i) for i in [0, n) across worker threads. Iteration order
/// within a worker is ascending; results must not depend on cross-worker
/// order (callers write to disjoint slots and reduce sequentially).
/// The first exception thrown by any worker is rethrown on the caller.
inline void parallelFor(Index n, const std::function<void(Index)>& body) {
  if (n <= 0) return;
  const int workers = std::min<int>(workerCount(), static_cast<int>(n));
  if (workers == 1) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    threads.emplace_back([&, t] {
      const Index begin = n * t / workers;
      const Index end = n * (t + 1) / workers;
      try {
        for (Index i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& thread : threads) thread.join();
  for (const std::exception_ptr& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

}  // namespace nnlrp
