#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace asap {

/// Number of worker threads used by row-parallel kernels. Defaults to the
/// machine's hardware concurrency.
std::size_t thread_count() noexcept;
void set_thread_count(std::size_t count) noexcept;

/// Runs fn(i) for every i in [begin, end), split into contiguous chunks across
/// thread_count() threads. Small ranges run inline. Each index is visited
/// exactly once, so per-row results do not depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn, std::size_t min_chunk = 16) {
    if (end <= begin) {
        return;
    }
    const std::size_t total = end - begin;
    const std::size_t workers = std::min(thread_count(), (total + min_chunk - 1) / min_chunk);
    if (workers <= 1) {
        for (std::size_t i = begin; i < end; ++i) {
            fn(i);
        }
        return;
    }
    const std::size_t chunk = (total + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t lo = begin + w * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) {
            break;
        }
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) {
                fn(i);
            }
        });
    }
    for (std::size_t i = begin; i < std::min(end, begin + chunk); ++i) {
        fn(i);
    }
}

}  // namespace asap
