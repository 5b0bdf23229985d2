#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "htm/arith.hpp"

namespace htm {

class CharacterGroup;

// A Dirichlet character mod q, represented by its exponent vector against
// the fixed CRT generators of the group.  Conductor, primitivity and the
// Gauss sum are computed at construction, so instances are immutable and
// safe to share across threads.
class DirichletCharacter {
  public:
    DirichletCharacter() = default;  // empty shell; assign from CharacterGroup::character

    std::uint64_t modulus() const { return q_; }
    std::uint64_t index() const { return index_; }
    const std::vector<std::uint32_t>& exponents() const { return exponents_; }

    std::uint64_t conductor() const { return conductor_; }
    bool is_primitive() const { return conductor_ == q_; }
    bool is_principal() const { return conductor_ == 1; }
    bool is_real() const;                    // chi = conj(chi)
    std::complex<double> gauss_sum() const { return gauss_sum_; }
    int parity() const;                      // chi(-1)

    std::complex<double> operator()(std::uint64_t n) const;
    std::complex<double> operator()(std::int64_t n) const;

    // Exponent of chi(n) as a power of e(1/M), M = root_order(); n must be
    // coprime to q.  Hot path for moment sweeps.
    std::uint32_t root_exponent(std::uint64_t n_mod_q) const;
    std::uint32_t root_order() const;

    std::uint64_t conjugate_index() const;
    DirichletCharacter conjugate() const;

  private:
    friend class CharacterGroup;

    std::shared_ptr<const class CharacterGroupData> data_;
    std::uint64_t q_ = 1;
    std::uint64_t index_ = 0;
    std::vector<std::uint32_t> exponents_;
    std::uint64_t conductor_ = 1;
    std::complex<double> gauss_sum_{1.0, 0.0};
};

// The character group mod q as a product of cyclic factors from the CRT
// splitting of (Z/qZ)*: one factor of order phi(p^e) per odd prime power,
// and for 2^e with e >= 3 the pair C2 x C_{2^(e-2)}.  Discrete-log tables
// are built once; evaluation afterwards is table lookup.  Characters are
// enumerated lexicographically in their exponent vectors, index 0 being
// the principal character.
class CharacterGroup {
  public:
    explicit CharacterGroup(std::uint64_t q);

    std::uint64_t modulus() const;
    std::uint64_t order() const;            // phi(q)
    const Factorization& factorization() const;

    DirichletCharacter character(std::uint64_t index) const;

    // Conductor from the exponent vector alone (no Gauss sum); used by the
    // census so counting stays O(phi(q)).
    std::uint64_t conductor_of_index(std::uint64_t index) const;
    std::uint64_t primitive_count_by_enumeration() const;

    // Number of cyclic factors and their orders.
    const std::vector<std::uint32_t>& factor_orders() const;

    bool is_unit(std::uint64_t n_mod_q) const;

    // e(a/q) table shared by Gauss sums.
    const std::vector<std::complex<double>>& unit_roots_mod_q() const;

  private:
    std::shared_ptr<const class CharacterGroupData> data_;
};

// Divisor-sum side of the orthogonality identity for primitive characters:
//   sum*_{chi mod q} chi(n) conj(chi(m)) = sum_{d | q, n == m mod q/d} mu(d) phi(q/d),
// valid for gcd(nm, q) = 1.  Exact integer arithmetic.
std::int64_t orthogonality_rhs(std::int64_t n, std::int64_t m, const Factorization& q);

// i^k tau(chi)^2 / q for primitive chi; unimodular.  Throws for
// non-primitive chi.
std::complex<double> root_number(const DirichletCharacter& chi, int weight);

}  // namespace htm
