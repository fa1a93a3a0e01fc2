#include "mamppi/core/parallel.hpp"

#include <algorithm>
#include <cstdlib>

namespace mamppi {

ThreadPool::ThreadPool(int workers) {
    const int extra = std::max(0, workers - 1);
    threads_.reserve(static_cast<std::size_t>(extra));
    for (int i = 0; i < extra; ++i) {
        threads_.emplace_back([this] { worker_loop(); });
    }
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        stop_ = true;
    }
    work_ready_.notify_all();
    for (auto& t : threads_) {
        t.join();
    }
}

void ThreadPool::worker_loop() {
    for (;;) {
        Range range{};
        const std::function<void(int)>* job = nullptr;
        {
            std::unique_lock<std::mutex> lock(mutex_);
            work_ready_.wait(lock, [this] { return stop_ || !pending_.empty(); });
            if (stop_ && pending_.empty()) {
                return;
            }
            range = pending_.back();
            pending_.pop_back();
            job = job_;
        }
        for (int i = range.begin; i < range.end; ++i) {
            (*job)(i);
        }
        {
            std::lock_guard<std::mutex> lock(mutex_);
            --in_flight_;
        }
        work_done_.notify_one();
    }
}

void ThreadPool::parallel_for(int n, const std::function<void(int)>& fn) {
    if (n <= 0) {
        return;
    }
    const int w = workers();
    if (w == 1 || n == 1) {
        for (int i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    const int chunks = std::min(n, w);
    const int base = n / chunks;
    const int rem = n % chunks;
    Range own{};
    {
        std::lock_guard<std::mutex> lock(mutex_);
        job_ = &fn;
        int begin = 0;
        for (int c = 0; c < chunks; ++c) {
            const int len = base + (c < rem ? 1 : 0);
            Range r{begin, begin + len};
            begin += len;
            if (c == 0) {
                own = r;
            } else {
                pending_.push_back(r);
                ++in_flight_;
            }
        }
    }
    work_ready_.notify_all();
    for (int i = own.begin; i < own.end; ++i) {
        fn(i);
    }
    std::unique_lock<std::mutex> lock(mutex_);
    work_done_.wait(lock, [this] { return in_flight_ == 0; });
    job_ = nullptr;
}

ThreadPool& ThreadPool::shared() {
    static ThreadPool pool([] {
        if (const char* env = std::getenv("MAMPPI_WORKERS")) {
            const int n = std::atoi(env);
            if (n >= 1) {
                return std::min(n, 64);
            }
        }
        const unsigned hc = std::thread::hardware_concurrency();
        return hc == 0 ? 1 : static_cast<int>(std::min(hc, 16u));
    }());
    return pool;
}

}  // namespace mamppi
