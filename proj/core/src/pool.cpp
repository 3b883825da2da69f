#include "flatpar/pool.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace flatpar {
namespace {

int env_thread_count() {
  if (const char* s = std::getenv("FLATPAR_THREADS")) {
    int n = std::atoi(s);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int> g_thread_count{0};  // 0 = unset, fall back to env

thread_local bool tl_in_worker = false;

// A persistent pool sized at first use. parallel_for may use fewer workers
// than the pool holds; surplus workers skip the job.
class Pool {
 public:
  static Pool& instance() {
    static Pool p;
    return p;
  }

  void run(std::size_t n, const std::function<void(std::size_t)>& body,
           int workers) {
    std::unique_lock<std::mutex> lock(job_mutex_);
    ensure_workers(static_cast<std::size_t>(workers) - 1);
    next_.store(0, std::memory_order_relaxed);
    job_size_ = n;
    job_body_ = &body;
    pending_ = workers - 1;  // calling thread participates
    ++generation_;
    {
      std::lock_guard<std::mutex> g(wake_mutex_);
      wake_generation_ = generation_;
      wake_workers_ = workers - 1;
    }
    wake_cv_.notify_all();

    tl_in_worker = true;  // nested parallel_for from the body runs inline
    work();
    tl_in_worker = false;

    std::unique_lock<std::mutex> done(done_mutex_);
    done_cv_.wait(done, [&] { return pending_ == 0; });
    job_body_ = nullptr;
  }

 private:
  Pool() {
    unsigned hw = std::thread::hardware_concurrency();
    ensure_workers(hw > 1 ? hw - 1 : 0);
  }

  // Grows the pool so requested thread counts above the hardware default
  // still make progress (oversubscribed, but correct). Called with
  // job_mutex_ held, or from the constructor.
  void ensure_workers(std::size_t n) {
    while (threads_.size() < n) {
      const std::size_t id = threads_.size();
      threads_.emplace_back([this, id] { worker_loop(id); });
    }
  }

  ~Pool() {
    {
      std::lock_guard<std::mutex> g(wake_mutex_);
      stop_ = true;
    }
    wake_cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void worker_loop(std::size_t id) {
    tl_in_worker = true;
    std::uint64_t seen = 0;
    for (;;) {
      std::unique_lock<std::mutex> lock(wake_mutex_);
      wake_cv_.wait(lock,
                    [&] { return stop_ || wake_generation_ != seen; });
      if (stop_) return;
      seen = wake_generation_;
      bool participate = id < wake_workers_;
      lock.unlock();
      if (!participate) continue;
      work();
      {
        std::lock_guard<std::mutex> g(done_mutex_);
        --pending_;
      }
      done_cv_.notify_one();
    }
  }

  void work() {
    const auto n = job_size_;
    const auto* body = job_body_;
    for (;;) {
      std::size_t i = next_.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) break;
      (*body)(i);
    }
  }

  std::vector<std::thread> threads_;
  std::mutex job_mutex_;

  std::mutex wake_mutex_;
  std::condition_variable wake_cv_;
  std::uint64_t generation_ = 0;
  std::uint64_t wake_generation_ = 0;
  std::size_t wake_workers_ = 0;
  bool stop_ = false;

  std::mutex done_mutex_;
  std::condition_variable done_cv_;
  int pending_ = 0;

  std::atomic<std::size_t> next_{0};
  std::size_t job_size_ = 0;
  const std::function<void(std::size_t)>* job_body_ = nullptr;
};

}  // namespace

int thread_count() {
  int n = g_thread_count.load(std::memory_order_relaxed);
  return n > 0 ? n : env_thread_count();
}

void set_thread_count(int n) {
  g_thread_count.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  int workers = thread_count();
  if (workers < 1) workers = 1;
  if (static_cast<std::size_t>(workers) > n)
    workers = static_cast<int>(n);
  if (workers == 1 || tl_in_worker) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  Pool::instance().run(n, body, workers);
}

}  // namespace flatpar
