#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "htm/characters.hpp"
#include "htm/eigenform.hpp"

namespace htm {

// Everything one moment run produces.  The three routes:
//   direct      = sum over primitive chi of |L(f x chi, 1/2)|^2
//   double_sum  = sum_{d|q} mu(d) phi(q/d) sum_{n == m mod q/d, (nm,q)=1}
//                   a(n) a(m) / sqrt(nm) * V(nm/q^2)
//   main_term   = K P_q(1) psi(q) q log q
// plus the small/large divisor partition (threshold (log q)^0.05) and the
// diagonal (n = m) split inside the small-divisor part.
struct MomentReport {
    std::uint64_t q = 0;

    double direct = 0.0;
    double double_sum = 0.0;
    double diagonal_part = 0.0;
    double off_diagonal_part = 0.0;
    double small_divisor_part = 0.0;
    double large_divisor_part = 0.0;
    double main_term = 0.0;
    double K_used = 0.0;
    double ratio = 0.0;  // direct / main_term

    double diagonal_leading = 0.0;   // K P_q(1) log q, the predicted diagonal scale
    double neglected_mass = 0.0;     // double-sum tail beyond the table/support cap
    int small_divisor_count = 0;     // number of divisors below the threshold

    // Condition diagnostics (NaN / false when q < 17).
    double condition_x = 0.0;
    double condition_lhs = 0.0;
    double condition_rhs = 0.0;
    bool condition_holds = false;
    double divisor_condition_sum = 0.0;

    std::optional<double> ratio_with_K_override;

    double tol = 0.0;
    std::uint64_t truncation_N = 0;   // per-character AFE truncation
    std::uint64_t table_length = 0;

    // Wall-clock seconds per stage.  Informational only: excluded from the
    // deterministic serialization so reports compare byte-identical across
    // thread counts.
    std::map<std::string, double> runtime_seconds;
};

struct DoubleSumParts {
    double total = 0.0;
    double small_part = 0.0;
    double large_part = 0.0;
    double diagonal_part = 0.0;       // diagonal inside the small-divisor part
    double off_diagonal_part = 0.0;
    double neglected_mass = 0.0;
    int small_divisor_count = 0;
};

// Route 1: character sweep over primitive chi only, chi and conj(chi)
// evaluated once and doubled.  tol is the per-L-value truncation tolerance.
double second_moment_direct(const EigenformCoefficients& coeffs, std::uint64_t q,
                            double tol, unsigned threads = 1);

// Route 2: orthogonality double sum with the divisor partition.
DoubleSumParts second_moment_double_sum(const EigenformCoefficients& coeffs, std::uint64_t q,
                                        double tol, unsigned threads = 1);

// The diagonal sum_{(n,q)=1} a(n)^2/n V(n^2/q^2); *leading_out receives the
// predicted K P_q(1) log q when non-null.
double diagonal_sum(const EigenformCoefficients& coeffs, std::uint64_t q, double tol,
                    double* leading_out = nullptr);

// K_est * P_q(1) * psi(q) * q * log q.
double main_term(const EigenformCoefficients& coeffs, std::uint64_t q,
                 std::optional<double> K_override = {});

MomentReport moment_report(const EigenformCoefficients& coeffs, std::uint64_t q, double tol,
                           unsigned threads = 1, std::optional<double> K_override = {});

// Second moment over the full character group mod q, assembled from the
// conductor decomposition: every chi mod q is induced by a primitive chi*
// mod d | q and |L(f x chi)|^2 = |L(f x chi*)|^2 prod_{p | q, p coprime d}
// |local factor|^2.
double full_group_second_moment(const EigenformCoefficients& coeffs, std::uint64_t q,
                                double tol, unsigned threads = 1);

// Per-character truncation the moment sweep will use for modulus q.
std::uint64_t moment_required_length(std::uint64_t q, double tol, int weight);

}  // namespace htm
