#include "htm/eigenform.hpp"

#include <cmath>
#include <type_traits>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "htm/arith.hpp"
#include "htm/parallel.hpp"

namespace htm {

namespace {

// Sparse Jacobi series J = prod (1-x^n)^3 = sum (-1)^m (2m+1) x^{m(m+1)/2},
// truncated below N.
struct SparseSeries {
    std::vector<std::uint64_t> offset;
    std::vector<std::int64_t> coef;
};

SparseSeries jacobi_series(std::uint64_t N) {
    SparseSeries s;
    for (std::uint64_t m = 0;; ++m) {
        std::uint64_t g = m * (m + 1) / 2;
        if (g >= N) break;
        s.offset.push_back(g);
        s.coef.push_back((m % 2 ? -1 : 1) * static_cast<std::int64_t>(2 * m + 1));
    }
    return s;
}

// One multiplication next = cur * J over blocks [b0, b1).  T is int64 for
// the low-weight passes and __int128 afterwards; arithmetic is
// overflow-checked so a too-large N fails loudly instead of wrapping.
// The multiplier is a small integer, so the product check is a magnitude
// guard against T_MAX / |coef| instead of a full checked multiply.
template <typename T>
void sparse_multiply(const SparseSeries& J, const std::vector<T>& cur, std::vector<T>& next,
                     unsigned threads) {
    const std::uint64_t N = cur.size();
    const std::uint64_t block = 1 << 17;
    const std::size_t nblocks = (N + block - 1) / block;
    using U = std::conditional_t<sizeof(T) == 16, unsigned __int128, std::uint64_t>;
    constexpr T t_max = static_cast<T>(~U(0) >> 1);
    std::vector<std::uint8_t> overflow(nblocks, 0);
    parallel_chunks(nblocks, threads, [&](std::size_t bi) {
        std::uint64_t b0 = bi * block;
        std::uint64_t b1 = std::min<std::uint64_t>(N, b0 + block);
        for (std::size_t i = 0; i < J.offset.size(); ++i) {
            std::uint64_t g = J.offset[i];
            if (g >= b1) break;
            const std::int64_t c = J.coef[i];
            const T guard = t_max / static_cast<T>(c < 0 ? -c : c);
            for (std::uint64_t j = std::max(b0, g); j < b1; ++j) {
                T v = cur[j - g];
                if (v > guard || v < -guard) {
                    overflow[bi] = 1;
                    return;
                }
                if (__builtin_add_overflow(next[j], v * c, &next[j])) {
                    overflow[bi] = 1;
                    return;
                }
            }
        }
    });
    for (auto f : overflow)
        if (f) throw std::overflow_error("delta_coefficients: series coefficient overflow (reduce N)");
}

}  // namespace

EigenformCoefficients delta_coefficients(std::uint64_t N) {
    if (N == 0) throw std::invalid_argument("delta_coefficients: N must be positive");
    if (N > 10000000ull)
        throw std::invalid_argument("delta_coefficients: N capped at 10^7");

    const unsigned threads = default_thread_count();
    SparseSeries J = jacobi_series(N);

    // tau(n) = [x^{n-1}] J^8.  The first two multiplications by J stay
    // within int64 (J^3 is a weight-4.5 expansion, coefficients ~ n^{7/4});
    // the rest run in 128-bit.  Should the int64 stage ever trip its
    // overflow check, redo it in 128-bit.
    std::vector<__int128> cur(N, 0);
    int passes_done = 0;
    try {
        std::vector<std::int64_t> cur64(N, 0), next64;
        for (std::size_t i = 0; i < J.offset.size(); ++i) cur64[J.offset[i]] = J.coef[i];
        for (int pass = 0; pass < 2; ++pass) {
            next64.assign(N, 0);
            sparse_multiply(J, cur64, next64, threads);
            cur64.swap(next64);
        }
        for (std::uint64_t i = 0; i < N; ++i) cur[i] = cur64[i];
        passes_done = 2;
    } catch (const std::overflow_error&) {
        std::fill(cur.begin(), cur.end(), static_cast<__int128>(0));
        for (std::size_t i = 0; i < J.offset.size(); ++i) cur[J.offset[i]] = J.coef[i];
        passes_done = 0;
    }
    {
        std::vector<__int128> next;
        for (int pass = passes_done; pass < 7; ++pass) {
            next.assign(N, 0);
            sparse_multiply(J, cur, next, threads);
            cur.swap(next);
        }
    }

    EigenformCoefficients out;
    out.weight = 12;
    out.tau.resize(N + 1);
    out.a.resize(N + 1);
    out.tau[0] = 0;
    out.a[0] = 0.0;
    for (std::uint64_t n = 1; n <= N; ++n) {
        out.tau[n] = cur[n - 1];
        out.a[n] = static_cast<double>(out.tau[n]) / std::pow(static_cast<double>(n), 5.5);
    }
    return out;
}

EigenformCoefficients hecke_extend(const std::vector<std::pair<std::uint64_t, double>>& prime_values,
                                   std::uint64_t N, int weight,
                                   std::vector<std::uint64_t>* deligne_warnings) {
    if (N == 0) throw std::invalid_argument("hecke_extend: N must be positive");
    if (weight < 12 || weight % 2 != 0)
        throw std::invalid_argument("hecke_extend: weight must be an even integer >= 12");

    // Smallest-prime-factor sieve drives the multiplicative fill.
    std::vector<std::uint32_t> spf(N + 1, 0);
    for (std::uint64_t i = 2; i <= N; ++i) {
        if (spf[i] == 0)
            for (std::uint64_t j = i; j <= N; j += i)
                if (spf[j] == 0) spf[j] = static_cast<std::uint32_t>(i);
    }

    std::vector<double> ap(N + 1, std::nan(""));
    for (const auto& [p, v] : prime_values)
        if (p <= N) ap[p] = v;

    EigenformCoefficients out;
    out.weight = weight;
    out.a.assign(N + 1, 0.0);
    out.a[1] = 1.0;
    for (std::uint64_t n = 2; n <= N; ++n) {
        std::uint64_t p = spf[n];
        std::uint64_t pe = p, m = n / p;
        while (m % p == 0) {
            pe *= p;
            m /= p;
        }
        if (m > 1) {
            out.a[n] = out.a[pe] * out.a[m];
        } else if (pe == p) {
            if (std::isnan(ap[p]))
                throw std::invalid_argument("hecke_extend: missing prime coefficient for p=" +
                                            std::to_string(p));
            out.a[n] = ap[p];
            if (deligne_warnings && std::abs(ap[p]) > 2.0 + 1e-12)
                deligne_warnings->push_back(p);
        } else {
            // a(p^{j+1}) = a(p) a(p^j) - a(p^{j-1})
            std::uint64_t pj = pe / p, pjm = pe / (p * p);
            out.a[n] = out.a[p] * out.a[pj] - out.a[pjm];
        }
    }
    return out;
}

std::vector<std::uint32_t> divisor_count_sieve(std::uint64_t N) {
    std::vector<std::uint32_t> d(N + 1, 0);
    for (std::uint64_t i = 1; i <= N; ++i)
        for (std::uint64_t j = i; j <= N; j += i) ++d[j];
    return d;
}

std::vector<std::uint64_t> verify_deligne(const EigenformCoefficients& coeffs) {
    std::vector<std::uint64_t> bad;
    std::uint64_t N = coeffs.length();
    if (N == 0) return bad;
    auto d = divisor_count_sieve(N);
    for (std::uint64_t n = 1; n <= N; ++n)
        if (std::abs(coeffs.a[n]) > static_cast<double>(d[n]) + 1e-12) bad.push_back(n);
    return bad;
}

void save_tau_cache(const std::string& path, const EigenformCoefficients& coeffs) {
    if (!coeffs.has_exact_tau())
        throw std::invalid_argument("save_tau_cache: no exact tau table present");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_tau_cache: cannot open " + path);
    out.write("TAU1", 4);
    std::uint32_t w = static_cast<std::uint32_t>(coeffs.weight);
    std::uint64_t n = coeffs.length();
    out.write(reinterpret_cast<const char*>(&w), 4);
    out.write(reinterpret_cast<const char*>(&n), 8);
    for (std::uint64_t i = 1; i <= n; ++i) {
        unsigned __int128 u = static_cast<unsigned __int128>(coeffs.tau[i]);
        std::uint64_t lo = static_cast<std::uint64_t>(u);
        std::uint64_t hi = static_cast<std::uint64_t>(u >> 64);
        out.write(reinterpret_cast<const char*>(&lo), 8);
        out.write(reinterpret_cast<const char*>(&hi), 8);
    }
    if (!out) throw std::runtime_error("save_tau_cache: write failed for " + path);
}

EigenformCoefficients load_tau_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_tau_cache: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "TAU1", 4) != 0)
        throw std::runtime_error("load_tau_cache: bad magic in " + path);
    std::uint32_t w = 0;
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&w), 4);
    in.read(reinterpret_cast<char*>(&n), 8);
    if (!in || n == 0 || n > 10000000ull)
        throw std::runtime_error("load_tau_cache: bad header in " + path);
    EigenformCoefficients out;
    out.weight = static_cast<int>(w);
    out.tau.resize(n + 1);
    out.a.resize(n + 1);
    out.tau[0] = 0;
    out.a[0] = 0.0;
    double half_km1 = (out.weight - 1) / 2.0;
    for (std::uint64_t i = 1; i <= n; ++i) {
        std::uint64_t lo = 0, hi = 0;
        in.read(reinterpret_cast<char*>(&lo), 8);
        in.read(reinterpret_cast<char*>(&hi), 8);
        unsigned __int128 u = (static_cast<unsigned __int128>(hi) << 64) | lo;
        out.tau[i] = static_cast<__int128>(u);
        out.a[i] = static_cast<double>(out.tau[i]) / std::pow(static_cast<double>(i), half_km1);
    }
    if (!in) throw std::runtime_error("load_tau_cache: truncated file " + path);
    return out;
}

std::vector<std::pair<std::uint64_t, double>> load_prime_coefficients(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_prime_coefficients: cannot open " + path);
    std::vector<std::pair<std::uint64_t, double>> out;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t pos = line.find_first_not_of(" \t");
        if (pos == std::string::npos || line[pos] == '#') continue;
        std::istringstream ss(line);
        std::uint64_t p;
        double v;
        if (!(ss >> p >> v))
            throw std::runtime_error("load_prime_coefficients: malformed line: " + line);
        out.emplace_back(p, v);
    }
    return out;
}

}  // namespace htm
