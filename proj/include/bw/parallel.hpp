#pragma once

/// Block-parallel driver for the Monte Carlo checks. Work is split into
/// fixed-size path blocks whose results depend only on the block index
/// (counter RNG substreams), so any thread assignment yields bitwise
/// identical output. Thread count: BASKET_WING_THREADS if set, else the
/// hardware count.

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace bw {

inline unsigned thread_budget() {
    if (const char* env = std::getenv("BASKET_WING_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Runs fn(block) for every block in [0, n_blocks), striding blocks across
/// the thread budget. fn must only write state owned by its block index.
inline void for_each_block(std::uint64_t n_blocks,
                           const std::function<void(std::uint64_t)>& fn) {
    const unsigned budget = thread_budget();
    if (budget <= 1 || n_blocks <= 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    const unsigned workers =
        static_cast<unsigned>(budget < n_blocks ? budget : n_blocks);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::uint64_t b = w; b < n_blocks; b += workers) fn(b);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace bw
