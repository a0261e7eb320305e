#include "auq/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace auq {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int workers = std::min(threads, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto guarded = [&](int i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  // Contiguous blocks: thread t gets [t*chunk, ...), remainder spread left.
  int base = count / workers;
  int extra = count % workers;
  int start = 0;
  for (int t = 0; t < workers; ++t) {
    int len = base + (t < extra ? 1 : 0);
    pool.emplace_back([&guarded, start, len] {
      for (int i = start; i < start + len; ++i) guarded(i);
    });
    start += len;
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace auq
