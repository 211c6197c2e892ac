#pragma once

#include "xling/types.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace xling::detail {

// Calls fn(begin, end) for consecutive [begin, end) blocks covering [0, n).
// Blocks are handed out to up to `threads` workers; each block is processed
// by exactly one worker, so per-block results do not depend on scheduling.
template <class Fn>
void for_each_block(Index n, Index block_size, int threads, Fn&& fn) {
  if (n <= 0) return;
  block_size = std::max<Index>(1, block_size);
  const Index blocks = (n + block_size - 1) / block_size;
  const int workers = static_cast<int>(std::min<Index>(std::max(1, threads), blocks));
  if (workers == 1) {
    for (Index b = 0; b < blocks; ++b) fn(b * block_size, std::min(n, (b + 1) * block_size));
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (Index b = next++; b < blocks; b = next++) {
      try {
        fn(b * block_size, std::min(n, (b + 1) * block_size));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace xling::detail
