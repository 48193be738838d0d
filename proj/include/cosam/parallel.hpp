#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace cosam {

// Runs fn(i) for i in [begin, end) across num_threads workers. Work is dealt
// in contiguous blocks via an atomic cursor, so results written to
// per-index slots are identical to a serial run regardless of thread count.
inline void parallel_for(std::int64_t begin, std::int64_t end, int num_threads,
                         const std::function<void(std::int64_t)>& fn) {
    const std::int64_t total = end - begin;
    if (total <= 0) return;
    if (num_threads <= 1 || total == 1) {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
        return;
    }
    const std::int64_t block = std::max<std::int64_t>(1, total / (8 * num_threads));
    std::atomic<std::int64_t> cursor{begin};
    std::vector<std::thread> workers;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto run = [&] {
        for (;;) {
            std::int64_t lo = cursor.fetch_add(block);
            if (lo >= end || failed.load(std::memory_order_relaxed)) return;
            std::int64_t hi = std::min(end, lo + block);
            try {
                for (std::int64_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    workers.reserve(num_threads);
    for (int t = 0; t < num_threads; ++t) workers.emplace_back(run);
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

} // namespace cosam
