#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace dirac1d {

/// Worker count: DIRAC1D_THREADS if set and positive, else hardware concurrency.
inline int thread_count()
{
    if (const char* env = std::getenv("DIRAC1D_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0)
            return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(k) for k in [0, count). Work items are independent; callers reduce
/// per-item results in index order, so outputs do not depend on the thread count.
template <class Body>
void parallel_for(int count, Body&& body)
{
    const int workers = std::min(thread_count(), count);
    if (workers <= 1) {
        for (int k = 0; k < count; ++k)
            body(k);
        return;
    }
    std::exception_ptr failure;
    std::mutex mtx;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int k = w; k < count; k += workers) {
                try {
                    body(k);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (!failure)
                        failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace dirac1d
