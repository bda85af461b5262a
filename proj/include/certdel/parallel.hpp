#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace certdel {

// Runs fn(0..count-1) on up to `jobs` threads. Tasks must be independent;
// results must not depend on scheduling (each task writes its own slots or
// accumulates into per-thread storage merged by the caller).
inline void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = std::min(jobs, count);
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([=, &fn]() {
      for (int i = w; i < count; i += workers) fn(i);
    });
  }
  for (std::thread& t : threads) t.join();
}

}  // namespace certdel
