#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace htm {

// Normalized Fourier coefficients of a level-1 Hecke eigenform.
// tau holds the exact integer eigenvalues (delta only; empty for forms
// loaded from a prime-coefficient file), a holds a_f(n) = tau(n) / n^((k-1)/2)
// with a_f(1) = 1.  Both arrays are 1-based; index 0 is unused.
struct EigenformCoefficients {
    int weight = 12;
    std::vector<__int128> tau;
    std::vector<double> a;

    std::uint64_t length() const { return a.empty() ? 0 : a.size() - 1; }
    bool has_exact_tau() const { return !tau.empty(); }
};

// Exact tau(n) for n <= N by expanding the eta product
// Delta = x * prod (1-x^n)^24 = x * J(x)^8,
// J = prod (1-x^n)^3 = sum_{m>=0} (-1)^m (2m+1) x^{m(m+1)/2}  (Jacobi),
// via repeated multiplication by the sparse series J.  All integer
// arithmetic is overflow-checked; N is capped at 10^7.
EigenformCoefficients delta_coefficients(std::uint64_t N);

// Fills a[n] for n <= N from prime values by complete multiplicativity and
// the Hecke recursion a(p^{j+1}) = a(p) a(p^j) - a(p^{j-1}).  Primes with
// |a(p)| > 2 are collected into deligne_warnings when provided (the fill
// still proceeds).
EigenformCoefficients hecke_extend(const std::vector<std::pair<std::uint64_t, double>>& prime_values,
                                   std::uint64_t N, int weight,
                                   std::vector<std::uint64_t>* deligne_warnings = nullptr);

// Every n with |a[n]| > d(n) + 1e-12; empty for delta.
std::vector<std::uint64_t> verify_deligne(const EigenformCoefficients& coeffs);

// d(n) for n = 0..N (index 0 unused).
std::vector<std::uint32_t> divisor_count_sieve(std::uint64_t N);

// Binary cache: magic "TAU1", weight (u32 LE), N (u64 LE), then N signed
// 128-bit little-endian integers tau(1..N).
void save_tau_cache(const std::string& path, const EigenformCoefficients& coeffs);
EigenformCoefficients load_tau_cache(const std::string& path);

// Plain-text prime coefficient file: one "p a_f(p)" pair per line,
// '#' starts a comment line.
std::vector<std::pair<std::uint64_t, double>> load_prime_coefficients(const std::string& path);

}  // namespace htm
