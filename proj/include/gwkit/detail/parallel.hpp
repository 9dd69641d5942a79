#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gwkit::detail {

// Worker count, controlled by the GWKIT_THREADS environment variable
// (default 1). Read once per process.
inline int thread_count() {
    static const int n = [] {
        const char* env = std::getenv("GWKIT_THREADS");
        if (env == nullptr) return 1;
        const int v = std::atoi(env);
        return v > 0 ? v : 1;
    }();
    return n;
}

// Runs fn(i) for i in [0, n). Each index is owned by exactly one worker and
// workers write only to their own indices, so output is identical for any
// thread count. The first exception thrown is rethrown on the caller.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
    const int workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::exception_ptr error;
    std::mutex error_mutex;
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int begin = w * chunk;
        const int end = std::min(n, begin + chunk);
        pool.emplace_back([&, begin, end] {
            try {
                for (int i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace gwkit::detail
