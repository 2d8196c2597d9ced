#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace ucp {

// Process-wide worker pool. Work is always split into deterministic
// [begin,end) chunks; combined with fixed-order reductions this makes every
// result independent of the worker count.
class ThreadPool {
  public:
    static ThreadPool& instance();

    // 0 = hardware concurrency. May be called before the pool is first used;
    // later calls resize the pool.
    static void set_threads(int n);

    int threads() const { return static_cast<int>(workers_.size()) + 1; }

    // Runs fn(chunk_index, begin, end) over [0,n) split into chunks of at
    // most `grain`. Blocks until all chunks are done. fn must only write to
    // chunk-disjoint state.
    void run_chunks(std::int64_t n, std::int64_t grain,
                    const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn);

    ~ThreadPool();

  private:
    explicit ThreadPool(int n);
    void worker_loop();

    struct Job {
        const std::function<void(std::int64_t, std::int64_t, std::int64_t)>* fn = nullptr;
        std::int64_t n = 0, grain = 0, next = 0, done = 0, chunks = 0;
    };

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_work_, cv_done_;
    Job job_;
    bool has_job_ = false;
    bool stop_ = false;
};

// Convenience wrapper: parallel loop over [0,n), chunk size auto.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body);

// Fixed-arity tree reduction of per-block partial sums. Blocks of 4096
// elements are summed sequentially, then block sums are combined pairwise in
// index order, so the result does not depend on how many threads ran.
double det_dot(std::span<const double> x, std::span<const double> y);
double det_norm2(std::span<const double> x);
double det_sum(std::span<const double> x);

} // namespace ucp
