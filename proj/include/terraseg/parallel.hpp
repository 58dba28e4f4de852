#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace terraseg {

// Work-sharing helper for loops whose iterations write disjoint outputs.
// Results must not depend on which worker ran an index, so every use keeps
// reductions in index order on the calling thread.
class ThreadPool {
 public:
  explicit ThreadPool(int threads);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int thread_count() const { return static_cast<int>(workers_.size()) + 1; }

  // Runs fn(i) for i in [0, n). Blocks until all iterations finished.
  // Exceptions from workers are rethrown on the calling thread.
  void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

 private:
  struct Job;
  void worker_loop();

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::mutex submit_mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  Job* job_ = nullptr;
  uint64_t generation_ = 0;
  bool stop_ = false;
};

// Process-wide pool used by the heavy loops; size it once from --threads.
ThreadPool& global_pool();
void set_global_threads(int threads);

inline void parallel_for(int64_t n, const std::function<void(int64_t)>& fn) {
  global_pool().parallel_for(n, fn);
}

}  // namespace terraseg
