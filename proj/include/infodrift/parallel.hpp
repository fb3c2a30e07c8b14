#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <span>
#include <thread>
#include <vector>

namespace infodrift {

// Calls fn(i) for i in [0, n) on `threads` workers with static contiguous
// chunks. fn must write only to index-owned storage. The first exception (by
// chunk order) is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline int default_threads() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Pairwise summation; the result depends only on the order of `values`.
inline double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 16) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct SampleStats {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

// Mean and standard error (sample sd / sqrt(n)); stderr is 0 for n < 2.
inline SampleStats sample_stats(std::span<const double> values) {
    SampleStats s;
    s.n = values.size();
    if (s.n == 0) return s;
    s.mean = pairwise_sum(values) / static_cast<double>(s.n);
    if (s.n < 2) return s;
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(),
                   [&](double v) { return (v - s.mean) * (v - s.mean); });
    const double var = pairwise_sum(sq) / static_cast<double>(s.n - 1);
    s.std_error = std::sqrt(var / static_cast<double>(s.n));
    return s;
}

}  // namespace infodrift
