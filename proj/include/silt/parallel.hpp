#pragma once

// Deterministic data parallelism. Work is split into contiguous static blocks
// and every result lands in its own slot, so the output never depends on how
// many workers ran or in which order they finished.

#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace silt::parallel {

/// Worker cap: SILT_THREADS if set to a positive integer, else the core count.
std::size_t worker_count();

/// Calls f(i) for i in [0, n) on up to `workers` threads. The first exception
/// thrown by any call is rethrown on the calling thread.
template <class F>
void for_each_index(std::size_t n, F&& f, std::size_t workers = worker_count()) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    workers = std::min(workers, n);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) f(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

/// results[i] = f(i).
template <class T, class F>
std::vector<T> map(std::size_t n, F&& f, std::size_t workers = worker_count()) {
    std::vector<T> out(n);
    for_each_index(n, [&](std::size_t i) { out[i] = f(i); }, workers);
    return out;
}

/// Pairwise (recursive halving) sum with a fixed association order.
double pairwise_sum(std::span<const double> xs);

}  // namespace silt::parallel
