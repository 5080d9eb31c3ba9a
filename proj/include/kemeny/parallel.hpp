#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kemeny {

inline std::size_t default_thread_count() {
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs body(state, i) for i in [0, count) on up to `threads` workers. Each
/// worker builds its own state with make_state(). The first exception thrown
/// by any worker is rethrown on the calling thread.
template <typename MakeState, typename Body>
void parallel_for(std::size_t count, std::size_t threads, MakeState make_state, Body body) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads <= 1) {
        auto state = make_state();
        for (std::size_t i = 0; i < count; ++i) body(state, i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            auto state = make_state();
            for (std::size_t i = next++; i < count; i = next++) body(state, i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace kemeny
