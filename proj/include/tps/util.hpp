#ifndef TPS_UTIL_HPP
#define TPS_UTIL_HPP

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace tps {

// Counter-based splitmix64 stream: replicate r of a batch run always sees the
// same seed regardless of execution order or thread count.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items write to
// index-addressed slots only, so results do not depend on the schedule.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    threads = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < n; i += threads) fn(i);
        });
    for (auto& th : pool) th.join();
}

inline Eigen::VectorXd linspace(double lo, double hi, int n) {
    return Eigen::VectorXd::LinSpaced(n, lo, hi);
}

}  // namespace tps

#endif
