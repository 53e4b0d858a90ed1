#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace asgk {

inline unsigned default_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

inline unsigned resolve_threads(unsigned requested) {
    return requested == 0 ? default_threads() : requested;
}

// Splits [0, total) into one contiguous block per worker and runs
// fn(begin, end, worker) on each. Exceptions from workers are rethrown
// on the calling thread.
template <class Fn>
void parallel_blocks(std::uint64_t total, unsigned threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (total == 0) return;
    if (threads > total) threads = static_cast<unsigned>(total);
    if (threads <= 1) {
        fn(std::uint64_t{0}, total, 0u);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::uint64_t chunk = total / threads;
    const std::uint64_t rem = total % threads;
    std::uint64_t begin = 0;
    for (unsigned w = 0; w < threads; ++w) {
        const std::uint64_t end = begin + chunk + (w < rem ? 1 : 0);
        pool.emplace_back([&fn, &errors, begin, end, w] {
            try {
                fn(begin, end, w);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Dynamic work distribution over [0, count); fn(i) must be safe to call
// concurrently for distinct i.
template <class Fn>
void parallel_for_index(std::size_t count, unsigned threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (count == 0) return;
    if (threads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&next, &fn, &errors, count, w] {
            try {
                for (;;) {
                    const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                    if (i >= count) break;
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace asgk
