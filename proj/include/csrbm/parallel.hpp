#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace csrbm {

/// Process-wide default worker count; 0 means hardware concurrency.
void set_default_workers(int workers);
int default_workers();

namespace detail {
// Set on worker threads; nested parallel_for calls then run inline.
inline thread_local bool inside_parallel = false;
}  // namespace detail

/// Runs fn(i) for i in [0, n) on up to `workers` threads using static
/// contiguous chunks. Each index must write only to its own output slots;
/// results are then independent of the worker count. The first exception
/// thrown by any worker is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, int workers = default_workers()) {
  if (n == 0) return;
  std::size_t w = std::clamp<std::size_t>(workers > 0 ? static_cast<std::size_t>(workers) : 1, 1, n);
  if (w == 1 || detail::inside_parallel) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> threads;
  threads.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    std::size_t begin = n * t / w;
    std::size_t end = n * (t + 1) / w;
    threads.emplace_back([&, begin, end] {
      detail::inside_parallel = true;
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  threads.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace csrbm
