#pragma once

#include <complex>
#include <cstdint>

#include "htm/characters.hpp"
#include "htm/eigenform.hpp"
#include "htm/special_functions.hpp"

namespace htm {

struct LValueResult {
    std::complex<double> value{0.0, 0.0};
    std::complex<double> s{0.0, 0.0};
    std::uint64_t q = 0;
    std::uint64_t truncation_N = 0;
    double tail_bound = 0.0;     // divisor-average envelope of the dropped tail
    double epsilon_trunc = 0.0;  // truncation_N <= ceil(q^(1+epsilon_trunc))
    double contour_c = 0.0;      // W-contour descriptors actually used
    double contour_T = 0.0;
    double contour_h = 0.0;
};

// Central-strip evaluation of L(f x chi, 1/2 + s) for primitive chi and
// purely imaginary s, by the two-term smoothed expansion
//   sum_n a(n) chi(n) n^(-1/2-s) W_s(n/q)
//   + i^k (tau(chi)^2/q) (2 pi)^(2s) Gamma(k/2-s) / (q^(2s) Gamma(k/2+s))
//     * sum_n a(n) conj(chi)(n) n^(-1/2+s) W_{-s}(n/q).
// Truncation grows until the divisor-bound tail estimate drops below tol.
// Summation is ascending in n with compensated accumulation.
LValueResult l_value_afe(const EigenformCoefficients& coeffs, const DirichletCharacter& chi,
                         std::complex<double> s, double tol);

// Relative residual |LHS - RHS| / (|LHS| + |RHS| + 1e-300) of the exact
// functional equation
//   (q/2pi)^s Gamma(k/2+s) L(f x chi, 1/2+s)
//     = i^k (tau(chi)^2/q) (q/2pi)^-s Gamma(k/2-s) L(f x conj(chi), 1/2-s).
double fe_residual(const EigenformCoefficients& coeffs, const DirichletCharacter& chi,
                   std::complex<double> s, double tol);

// The twisted local Euler factor 1 - a_f(p) chi(p) p^(-s-1/2) + chi(p^2) p^(-2s-1).
std::complex<double> euler_local_factor(const EigenformCoefficients& coeffs,
                                        const DirichletCharacter& chi,
                                        std::uint64_t p, std::complex<double> s);

// Truncated Dirichlet series sum_{n<=N} a(n) chi(n) n^-s, valid only in the
// region of absolute convergence (requires Re s >= 1.5).
std::complex<double> l_series_partial(const EigenformCoefficients& coeffs,
                                      const DirichletCharacter& chi,
                                      std::complex<double> s, std::uint64_t N);

// Smallest truncation length whose tail estimate is below tol, using the
// d(n)-average envelope and the W_s kernel decay.  Grows the length
// multiplier geometrically; throws if the internal cap (kernel grid range)
// cannot meet tol.
std::uint64_t afe_required_length(std::uint64_t q, std::complex<double> s, double tol,
                                  int weight);

// Tail estimate sum_{n>N} (log n + 2 gamma) n^(-1/2) |W|(n/q) for one AFE
// sum, evaluated from the kernel table envelope.
double afe_tail_estimate(const KernelTable& table, std::uint64_t q, std::uint64_t N);

}  // namespace htm
