#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace htm {

// Compensated (Neumaier) accumulator.  Safe to merge partials in a fixed
// order: the merged result depends only on the insertion order, never on
// which thread produced a partial.
struct NeumaierSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    void add(const NeumaierSum& other) {
        add(other.sum);
        add(other.carry);
    }
    double value() const { return sum + carry; }
};

struct NeumaierCSum {
    NeumaierSum re, im;
    void add(std::complex<double> z) {
        re.add(z.real());
        im.add(z.imag());
    }
    void add(const NeumaierCSum& other) {
        re.add(other.re);
        im.add(other.im);
    }
    std::complex<double> value() const { return {re.value(), im.value()}; }
};

// Runs body(chunk_index) for chunk_index in [0, num_chunks).  The chunk grid
// is fixed by the caller, so per-chunk results are identical for any thread
// count; callers combine them in chunk order to stay bit-reproducible.
inline void parallel_chunks(std::size_t num_chunks, unsigned threads,
                            const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || num_chunks <= 1) {
        for (std::size_t i = 0; i < num_chunks; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    unsigned n = std::min<std::size_t>(threads, num_chunks);
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < num_chunks; i += n) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline unsigned default_thread_count() {
    if (const char* env = std::getenv("HTM_THREADS")) {
        long v = std::atol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

}  // namespace htm
