#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace liouville {

// Worker count from LIOUVILLE_THREADS, default 1.
inline unsigned thread_count() {
    const char* env = std::getenv("LIOUVILLE_THREADS");
    if (!env) return 1;
    try {
        const long v = std::stol(env);
        return v < 1 ? 1u : static_cast<unsigned>(std::min<long>(v, 256));
    } catch (...) {
        return 1;
    }
}

// Static contiguous partition; body(i) must write only to slot i, so results do not
// depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    const unsigned t = std::min<std::size_t>(thread_count(), std::max<std::size_t>(n / 64, 1));
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(t);
    const std::size_t chunk = (n + t - 1) / t;
    for (unsigned k = 0; k < t; ++k) {
        pool.emplace_back([&, k] {
            try {
                const std::size_t lo = k * chunk, hi = std::min(n, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Pairwise summation in a fixed order.
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 16) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace liouville
