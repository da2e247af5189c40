#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace scalelaw {

// Worker count: SCALELAW_THREADS if set and positive, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* e = std::getenv("SCALELAW_THREADS")) {
    int n = std::atoi(e);
    if (n > 0) return unsigned(n);
  }
  unsigned h = std::thread::hardware_concurrency();
  return h ? h : 1;
}

// Runs fn(i) for i in [0, n) on a bounded pool.  Each index writes its own
// output slot, so results do not depend on scheduling.  The first exception
// is rethrown after all workers stop.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned workers = 0) {
  if (workers == 0) workers = worker_count();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex m;
  std::size_t next = 0;
  std::exception_ptr err;
  auto work = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lk(m);
        if (next >= n || err) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(m);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::min<std::size_t>(workers, n); ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace scalelaw
