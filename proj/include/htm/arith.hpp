#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace htm {

struct EigenformCoefficients;  // eigenform.hpp

// Exact prime factorization of a 63-bit positive integer.
// factors is ordered by strictly increasing prime; value==1 <=> factors empty.
struct Factorization {
    std::uint64_t value = 1;
    std::vector<std::pair<std::uint64_t, int>> factors;

    int nu() const { return static_cast<int>(factors.size()); }
    bool is_prime() const { return factors.size() == 1 && factors[0].second == 1; }
};

// Trial division over a 2/3/5 wheel up to 10^6, Pollard-Brent rho beyond.
// Rejects n = 0.
Factorization factorize(std::uint64_t n);

// Exact rational with int64 numerator/denominator, always normalized
// (den > 0, gcd(|num|, den) = 1).
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d);
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend Rational operator*(const Rational& a, const Rational& b);
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
};

std::int64_t mobius(const Factorization& f);
std::uint64_t euler_phi(const Factorization& f);
std::vector<std::uint64_t> divisors(const Factorization& f);  // ascending

// Multiplicative density of primitive characters: psi(p) = 1 - 2/p,
// psi(p^e) = (1 - 1/p)^2 for e >= 2.  q * psi(q) counts primitive
// characters mod q.
Rational psi(const Factorization& q);

// q * psi(q) as an exact integer: p^e * psi(p^e) = p - 2 (e = 1),
// p^(e-2) (p-1)^2 (e >= 2).
std::uint64_t primitive_character_count(const Factorization& q);

// Finite Euler product over p | q correcting for the coprimality condition
// in the twisted second moment:
//   P_q(s) = prod_{p|q} (1 - p^-s)^2 (1 - (a_f(p)^2 - 2) p^-s + p^-2s)
//            (1 - p^-2s)^-1.
// For s = 1 the logarithmic derivative P'(1)/P(1) is filled analytically
// (each factor is a Dirichlet polynomial in p^-s; no numerical differencing).
struct EulerProductValue {
    std::complex<double> at_s{1.0, 0.0};
    std::optional<double> log_derivative_at_1;
};
EulerProductValue euler_product_P(const Factorization& q, std::complex<double> s,
                                  const EigenformCoefficients& coeffs);

// Diagnostic for the sparse-large-prime condition
//   sum_{p|q, p > x} 1/p <= (log log q)^-10,  x = exp(log log q / (200 log log log q)).
// At desk scale x is barely above 1 and the right side is tiny, so the
// condition usually fails; that is expected and does not gate any
// computation here.
struct ConditionReport {
    std::uint64_t q = 0;
    double x_threshold = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};
ConditionReport check_assumption(const Factorization& q);  // requires q >= 17

// sum over squarefree d | q with d >= (log q)^0.05 of prod_{p|d}(1 + 10/sqrt p) / d.
double divisor_condition_sum(const Factorization& q);  // requires q >= 3
// Same sum with the threshold exposed (monotonicity tests).
double divisor_condition_sum_with_threshold(const Factorization& q, double threshold);

// Mean-square estimator for the Rankin-Selberg constant:
//   K ~ 2 * sum_{n<=cutoff} a_f(n)^2 / cutoff.
double estimate_K(const EigenformCoefficients& coeffs, std::uint64_t cutoff);
// Richardson extrapolation of the same estimator against cutoff/2, assuming
// an x^(-2/5) error model from the classical O(x^(3/5)) partial-sum remainder.
double estimate_K_extrapolated(const EigenformCoefficients& coeffs, std::uint64_t cutoff);

// Shared helpers.
std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b);
std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);
bool is_prime_u64(std::uint64_t n);

}  // namespace htm
