#include "terraseg/parallel.hpp"

#include <atomic>
#include <cstdint>
#include <exception>
#include <memory>

namespace terraseg {

namespace {
thread_local bool t_inside_pool = false;
}

struct ThreadPool::Job {
  int64_t n = 0;
  const std::function<void(int64_t)>* fn = nullptr;
  std::atomic<int64_t> next{0};
  int active = 0;  // guarded by the pool mutex
  std::exception_ptr error;
  std::mutex error_mutex;

  void run() {
    t_inside_pool = true;
    for (;;) {
      int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) break;
      try {
        (*fn)(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
    t_inside_pool = false;
  }
};

ThreadPool::ThreadPool(int threads) {
  if (threads < 1) threads = 1;
  workers_.reserve(static_cast<size_t>(threads - 1));
  for (int i = 0; i < threads - 1; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadPool::worker_loop() {
  uint64_t seen = 0;
  for (;;) {
    Job* job = nullptr;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stop_ || (generation_ != seen && job_ != nullptr); });
      if (stop_) return;
      seen = generation_;
      job = job_;
      ++job->active;
    }
    job->run();
    {
      std::lock_guard lock(mutex_);
      --job->active;
    }
    done_.notify_all();
  }
}

void ThreadPool::parallel_for(int64_t n, const std::function<void(int64_t)>& fn) {
  if (n <= 0) return;
  // Serial when the pool is size one, the loop is trivial, or we are already
  // inside a pool job (nested parallelism would deadlock the single queue).
  if (workers_.empty() || n == 1 || t_inside_pool) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::lock_guard submit_guard(submit_mutex_);
  Job job;
  job.n = n;
  job.fn = &fn;
  {
    std::lock_guard lock(mutex_);
    job_ = &job;
    ++generation_;
  }
  wake_.notify_all();
  job.run();  // the calling thread participates
  {
    std::unique_lock lock(mutex_);
    done_.wait(lock, [&] { return job.next.load() >= job.n && job.active == 0; });
    job_ = nullptr;
  }
  if (job.error) std::rethrow_exception(job.error);
}

namespace {
std::unique_ptr<ThreadPool> g_pool;
std::mutex g_pool_mutex;
}  // namespace

ThreadPool& global_pool() {
  std::lock_guard lock(g_pool_mutex);
  if (!g_pool) g_pool = std::make_unique<ThreadPool>(1);
  return *g_pool;
}

void set_global_threads(int threads) {
  std::lock_guard lock(g_pool_mutex);
  g_pool = std::make_unique<ThreadPool>(threads);
}

}  // namespace terraseg
