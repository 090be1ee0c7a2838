#ifndef OSMOSIS_PARALLEL_HPP
#define OSMOSIS_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace osmosis {

/// Runs fn(begin, end) over disjoint chunks of [first, last) on up to
/// `threads` workers. Chunks only partition index ranges whose work
/// writes disjoint outputs, so results are identical for every thread
/// count; reductions must be done by the caller in a fixed order.
inline void parallel_for(int first, int last, int threads,
                         const std::function<void(int, int)>& fn) {
    const int count = last - first;
    if (count <= 0) return;
    threads = std::clamp(threads, 1, count);
    if (threads == 1) {
        fn(first, last);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(threads);
    std::exception_ptr error;
    std::mutex error_mutex;
    const int chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = first + t * chunk;
        const int end = std::min(last, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace osmosis

#endif  // OSMOSIS_PARALLEL_HPP
