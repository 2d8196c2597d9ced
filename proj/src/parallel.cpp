#include "ucp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <memory>

namespace ucp {

namespace {
int requested_threads() {
    if (const char* env = std::getenv("UCP_LAB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;
}
std::atomic<int> g_thread_override{-1};
} // namespace

ThreadPool::ThreadPool(int n) {
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    for (int i = 0; i + 1 < n; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard<std::mutex> lk(mu_);
        stop_ = true;
    }
    cv_work_.notify_all();
    for (auto& w : workers_) w.join();
}

ThreadPool& ThreadPool::instance() {
    static std::unique_ptr<ThreadPool> pool;
    static std::mutex init_mu;
    std::lock_guard<std::mutex> lk(init_mu);
    const int want = g_thread_override.load() > 0 ? g_thread_override.load() : requested_threads();
    if (!pool || (want > 0 && pool->threads() != want)) {
        pool.reset();
        pool = std::unique_ptr<ThreadPool>(new ThreadPool(want));
    }
    return *pool;
}

void ThreadPool::set_threads(int n) {
    g_thread_override.store(n > 0 ? n : -1);
    instance(); // force re-creation now so later uses are consistent
}

void ThreadPool::worker_loop() {
    std::unique_lock<std::mutex> lk(mu_);
    for (;;) {
        cv_work_.wait(lk, [this] { return stop_ || (has_job_ && job_.next < job_.n); });
        if (stop_) return;
        while (has_job_ && job_.next < job_.n) {
            const std::int64_t b = job_.next;
            const std::int64_t e = std::min(job_.n, b + job_.grain);
            const std::int64_t chunk = b / job_.grain;
            job_.next = e;
            lk.unlock();
            (*job_.fn)(chunk, b, e);
            lk.lock();
            ++job_.done;
        }
        if (has_job_ && job_.done == job_.chunks) cv_done_.notify_all();
    }
}

void ThreadPool::run_chunks(std::int64_t n, std::int64_t grain,
                            const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    if (grain <= 0) grain = 1;
    if (workers_.empty() || n <= grain) {
        for (std::int64_t b = 0; b < n; b += grain)
            fn(b / grain, b, std::min(n, b + grain));
        return;
    }
    std::unique_lock<std::mutex> lk(mu_);
    job_.fn = &fn;
    job_.n = n;
    job_.grain = grain;
    job_.next = 0;
    job_.done = 0;
    job_.chunks = (n + grain - 1) / grain;
    has_job_ = true;
    cv_work_.notify_all();
    // main thread participates
    while (job_.next < job_.n) {
        const std::int64_t b = job_.next;
        const std::int64_t e = std::min(job_.n, b + grain);
        const std::int64_t chunk = b / grain;
        job_.next = e;
        lk.unlock();
        fn(chunk, b, e);
        lk.lock();
        ++job_.done;
    }
    cv_done_.wait(lk, [this] { return job_.done == job_.chunks; });
    has_job_ = false;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body) {
    auto& pool = ThreadPool::instance();
    const std::int64_t grain = std::max<std::int64_t>(1, n / (8 * pool.threads()));
    pool.run_chunks(n, grain, [&](std::int64_t, std::int64_t b, std::int64_t e) { body(b, e); });
}

namespace {
constexpr std::int64_t kBlock = 4096;

double combine_tree(std::vector<double>& partial) {
    // pairwise combination in fixed order, independent of thread count
    std::size_t m = partial.size();
    while (m > 1) {
        const std::size_t half = (m + 1) / 2;
        for (std::size_t i = 0; i + half < m; ++i) partial[i] += partial[i + half];
        m = half;
    }
    return partial.empty() ? 0.0 : partial[0];
}
} // namespace

double det_dot(std::span<const double> x, std::span<const double> y) {
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    const std::int64_t nb = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(static_cast<std::size_t>(std::max<std::int64_t>(nb, 1)), 0.0);
    ThreadPool::instance().run_chunks(n, kBlock, [&](std::int64_t chunk, std::int64_t b, std::int64_t e) {
        double s = 0.0;
        for (std::int64_t i = b; i < e; ++i) s += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
        partial[static_cast<std::size_t>(chunk)] = s;
    });
    return combine_tree(partial);
}

double det_norm2(std::span<const double> x) { return std::sqrt(det_dot(x, x)); }

double det_sum(std::span<const double> x) {
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    const std::int64_t nb = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(static_cast<std::size_t>(std::max<std::int64_t>(nb, 1)), 0.0);
    ThreadPool::instance().run_chunks(n, kBlock, [&](std::int64_t chunk, std::int64_t b, std::int64_t e) {
        double s = 0.0;
        for (std::int64_t i = b; i < e; ++i) s += x[static_cast<std::size_t>(i)];
        partial[static_cast<std::size_t>(chunk)] = s;
    });
    return combine_tree(partial);
}

} // namespace ucp
