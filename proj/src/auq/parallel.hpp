#pragma once

#include <functional>

namespace auq {

// Runs fn(i) for i in [0, count).  threads <= 1 runs inline in index order;
// otherwise work is split into contiguous blocks over std::thread.  Tasks must
// not depend on each other; the call joins all threads before returning, and
// the first exception thrown by any task is rethrown on the caller.  Results
// are identical for any thread count as long as tasks are independent.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace auq
