#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <string_view>
#include <thread>
#include <vector>

namespace siet {

/// Run fn(i) for i in [0, count), chunked over up to `threads` workers.
/// Each index is processed exactly once; results must be written to
/// per-index slots so the outcome is independent of the thread count.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    const int workers = std::min(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (int i = w; i < count; i += workers) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Deterministic uniform/simplex sampling on top of mt19937_64, bypassing the
/// implementation-defined standard distributions so seeds reproduce everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    double uniform() {  // in [0,1)
        return static_cast<double>(state_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::vector<double> simplex_point(int n) {
        std::vector<double> q(n);
        double sum = 0.0;
        for (double& v : q) {
            v = -std::log(1.0 - uniform());
            sum += v;
        }
        for (double& v : q) v /= sum;
        return q;
    }

private:
    std::mt19937_64 state_;
};

/// FNV-1a 64-bit hash, used to fingerprint spec files in run metadata.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace siet
