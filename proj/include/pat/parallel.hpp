#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace pat {

namespace detail {
inline int& thread_override() {
  static int value = 0;  // 0 = no override
  return value;
}
}  // namespace detail

// Process-wide worker cap; used by the strict sequential mode (cap 1).
inline void set_max_threads(int n) { detail::thread_override() = n; }

// Worker count: PAT_THREADS when set, otherwise the hardware concurrency,
// clamped by set_max_threads.
inline int thread_count() {
  static const int base = [] {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("PAT_THREADS")) {
      const int requested = std::atoi(env);
      if (requested >= 1) n = std::min(requested, 256);
    }
    return n;
  }();
  const int cap = detail::thread_override();
  return cap >= 1 ? std::min(base, cap) : base;
}

// Runs fn(i) for i in [0, n). Work items are independent and each writes
// disjoint outputs, so the result is bit-identical for any worker count;
// splitting across threads never changes the arithmetic inside an item.
template <typename Fn>
void parallel_for(std::int64_t n, Fn&& fn) {
  const int workers = static_cast<int>(std::min<std::int64_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const std::int64_t begin = n * w / workers;
    const std::int64_t end = n * (w + 1) / workers;
    pool.emplace_back([begin, end, &fn] {
      for (std::int64_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace pat
