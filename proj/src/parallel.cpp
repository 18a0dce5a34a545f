#include "asap/parallel.hpp"

#include <atomic>

namespace asap {

namespace {

std::size_t default_threads() noexcept {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

std::atomic<std::size_t> g_threads{default_threads()};

}  // namespace

std::size_t thread_count() noexcept {
    return g_threads.load(std::memory_order_relaxed);
}

void set_thread_count(std::size_t count) noexcept {
    g_threads.store(count == 0 ? default_threads() : count, std::memory_order_relaxed);
}

}  // namespace asap
