#ifndef MICFLOW_PARALLEL_HPP
#define MICFLOW_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace micflow {

// Worker cap: explicit argument > MICFLOW_THREADS > hardware concurrency.
inline int resolve_threads(int requested = 0)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("MICFLOW_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0)
            return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// Index-based parallel loop. Work items must not depend on execution order;
// callers write results by index so output is schedule-independent.
template <class Fn>
void parallel_for(std::size_t count, const Fn& fn, int threads = 0)
{
    const int nthreads = resolve_threads(threads);
    if (nthreads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next { 0 };
    std::exception_ptr error;
    std::atomic<bool> failed { false };
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load(std::memory_order_relaxed))
                return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true))
                    error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int spawn = static_cast<int>(std::min<std::size_t>(count, static_cast<std::size_t>(nthreads)));
    pool.reserve(spawn);
    for (int t = 0; t < spawn; ++t)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace micflow

#endif // MICFLOW_PARALLEL_HPP
