#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mfl {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559005768;

// phase in revolutions: e(t) = exp(2*pi*i*t)
inline cplx e_rev(double t) {
    double a = kTwoPi * t;
    return {std::cos(a), std::sin(a)};
}

// phase in radians: exp(i*t)
inline cplx e_rad(double t) { return {std::cos(t), std::sin(t)}; }

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Global default worker count, used when an operation gets threads=0.
int default_threads();
void set_default_threads(int n);

namespace detail {

inline int resolve_threads(int threads) {
    if (threads > 0) return threads;
    return default_threads();
}

// Runs body(b) for b in [0, nblocks); any scheduling order is fine because
// callers write results into per-block slots.
template <class Body>
void parallel_blocks(int64_t nblocks, int threads, Body&& body) {
    threads = resolve_threads(threads);
    if (threads <= 1 || nblocks <= 1) {
        for (int64_t b = 0; b < nblocks; ++b) body(b);
        return;
    }
    if (threads > nblocks) threads = static_cast<int>(nblocks);
    std::atomic<int64_t> next{0};
    auto worker = [&] {
        for (;;) {
            int64_t b = next.fetch_add(1, std::memory_order_relaxed);
            if (b >= nblocks) return;
            body(b);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (int t = 0; t + 1 < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

// Fixed pairwise (tree) reduction: the result depends only on the input
// order, never on the thread count. Reduces in place.
template <class T>
T pairwise_reduce(std::vector<T>& v) {
    if (v.empty()) return T{};
    size_t n = v.size();
    while (n > 1) {
        size_t h = n / 2;
        for (size_t i = 0; i < h; ++i) v[i] = v[2 * i] + v[2 * i + 1];
        if (n & 1) {
            v[h] = v[n - 1];
            n = h + 1;
        } else {
            n = h;
        }
    }
    return v[0];
}

// Accumulator for weighted means: value sum and weight sum travel together.
struct wsum {
    cplx s{0.0, 0.0};
    double w = 0.0;
    wsum operator+(const wsum& o) const { return {s + o.s, w + o.w}; }
};

inline constexpr int64_t kBlock = 4096;  // summation block size, fixed

// Deterministic weighted sum of term(n)*weight(n) over n in [lo, hi]:
// blocks of kBlock terms are summed left to right, then the block partials
// are combined by the fixed pairwise tree. Bit-identical for any `threads`.
template <class Term, class Weight>
wsum block_weighted_sum(int64_t lo, int64_t hi, int threads, Term&& term, Weight&& weight) {
    if (hi < lo) return {};
    int64_t count = hi - lo + 1;
    int64_t nblocks = (count + kBlock - 1) / kBlock;
    std::vector<wsum> partial(static_cast<size_t>(nblocks));
    parallel_blocks(nblocks, threads, [&](int64_t b) {
        int64_t blo = lo + b * kBlock;
        int64_t bhi = std::min(hi, blo + kBlock - 1);
        cplx s{0.0, 0.0};
        double w = 0.0;
        for (int64_t n = blo; n <= bhi; ++n) {
            double wn = weight(n);
            s += wn * term(n);
            w += wn;
        }
        partial[static_cast<size_t>(b)] = {s, w};
    });
    return pairwise_reduce(partial);
}

uint64_t fnv1a64(const void* data, size_t len);

}  // namespace detail

}  // namespace mfl
