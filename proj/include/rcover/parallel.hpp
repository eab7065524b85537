#ifndef RCOVER_PARALLEL_HPP
#define RCOVER_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rcover {

/// Calls fn(i) for i in [0, count) on up to `threads` workers.
///
/// Work items are claimed dynamically; callers write results into slots
/// indexed by i so the outcome does not depend on the worker count. The first
/// exception thrown by any item is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::int64_t count, int threads, Fn&& fn) {
    if (count <= 0) {
        return;
    }
    int workers = static_cast<int>(std::clamp<std::int64_t>(threads, 1, count));
    if (workers == 1) {
        for (std::int64_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mtx;
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::int64_t i = next.fetch_add(1);
                    if (i >= count) {
                        return;
                    }
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mtx);
                        if (!error) {
                            error = std::current_exception();
                        }
                        next.store(count);
                    }
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace rcover

#endif
