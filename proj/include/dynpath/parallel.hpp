#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace dynpath {

// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks must write
// only to their own output slot; results are then independent of scheduling.
template <class Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task) {
  const auto cap = static_cast<unsigned>(std::min<std::size_t>(count, 1u << 16));
  threads = std::max(1u, std::min(threads, cap));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace dynpath
