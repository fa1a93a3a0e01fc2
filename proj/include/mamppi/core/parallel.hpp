#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mamppi {

/// Persistent worker pool for the rollout loop. Work items are contiguous
/// index ranges; every index writes only its own output slot, so results do
/// not depend on the worker count.
class ThreadPool {
  public:
    explicit ThreadPool(int workers);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    int workers() const { return static_cast<int>(threads_.size()) + 1; }

    /// Runs fn(i) for i in [0, n); the calling thread participates.
    void parallel_for(int n, const std::function<void(int)>& fn);

    /// Shared pool sized from MAMPPI_WORKERS (default: hardware concurrency).
    static ThreadPool& shared();

  private:
    struct Range {
        int begin, end;
    };
    void worker_loop();

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable work_ready_;
    std::condition_variable work_done_;
    const std::function<void(int)>* job_ = nullptr;
    std::vector<Range> pending_;
    int in_flight_ = 0;
    bool stop_ = false;
};

}  // namespace mamppi
