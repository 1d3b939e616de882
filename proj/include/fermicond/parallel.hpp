#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fermicond {

// Runs fn(i) for i in [0, n) on `workers` threads, pulling indices from a
// shared counter. Results land in slot i, so reductions over the returned
// vector are independent of scheduling. The first exception is rethrown.
template <class T>
std::vector<T> parallel_map(int n, int workers, const std::function<T(int)>& fn) {
    std::vector<T> out(static_cast<std::size_t>(n));
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex m;
    auto body = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(m);
                if (!err) err = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, n); ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

} // namespace fermicond
