#pragma once
// Deterministic task parallelism.  Work is split into a fixed number of
// chunks independent of the thread count; per-chunk results are combined in
// chunk order, so reductions are bit-reproducible for any number of threads.

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace ciflow {

inline int& thread_count_ref() {
    static int n = [] {
        if (const char* env = std::getenv("CI_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) return v;
        }
        return 1;
    }();
    return n;
}

inline void set_threads(int n) { thread_count_ref() = n < 1 ? 1 : n; }
inline int threads() { return thread_count_ref(); }

// Runs fn(task) for task in [0, n_tasks).  Tasks may run on any thread;
// exceptions are rethrown on the caller.
inline void parallel_for(int n_tasks, const std::function<void(int)>& fn) {
    if (n_tasks <= 0) return;
    int nthreads = std::min(threads(), n_tasks);
    if (nthreads <= 1) {
        for (int t = 0; t < n_tasks; ++t) fn(t);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(nthreads);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int w = 0; w < nthreads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) fn(t);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Map tasks to values of T, then combine in ascending task order.
template <class T, class Map, class Combine>
T parallel_map_reduce(int n_tasks, T init, Map&& map, Combine&& combine) {
    std::vector<T> slots(size_t(std::max(n_tasks, 0)));
    parallel_for(n_tasks, [&](int t) { slots[size_t(t)] = map(t); });
    T acc = init;
    for (auto& s : slots) acc = combine(acc, s);
    return acc;
}

}  // namespace ciflow
