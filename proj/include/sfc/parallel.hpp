#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace sfc {

// Worker count resolution: an explicit override (CLI --deterministic sets 1)
// wins, otherwise the SFC_THREADS environment variable, otherwise hardware
// concurrency. 0 means "auto".
inline int& thread_override() {
    static int value = -1; // -1: no override
    return value;
}

inline void set_thread_override(int n) { thread_override() = n; }

inline int thread_count() {
    int n = thread_override();
    if (n < 0) {
        if (const char* env = std::getenv("SFC_THREADS")) n = std::atoi(env);
        else n = 0;
    }
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    return n > 0 ? n : 1;
}

// Runs f(i) for i in [begin, end). Each index writes only its own outputs, so
// the result is bit-identical for any worker count; there are no cross-thread
// reductions anywhere in this codebase.
template <class F>
void parallel_for(int begin, int end, F&& f) {
    const int n = end - begin;
    if (n <= 0) return;
    int workers = thread_count();
    if (workers > n) workers = n;
    if (workers <= 1 || n < 2) {
        for (int i = begin; i < end; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + w * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f] {
            for (int i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace sfc
