#include "htm/characters.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "htm/parallel.hpp"

namespace htm {

namespace {

constexpr std::uint32_t kNonUnit = 0xFFFFFFFFu;

// One prime-power block of (Z/qZ)*.  Odd p^e and 2^2 carry a single cyclic
// factor; 2^e with e >= 3 carries the sign factor <-1> of order 2 plus the
// cyclic factor <5> of order 2^(e-2); 2^1 carries nothing.
struct PrimePowerBlock {
    std::uint64_t p = 0;
    int e = 0;
    std::uint64_t pe = 1;
    std::uint64_t generator = 0;
    std::uint32_t main_order = 1;
    bool has_sign_factor = false;
    bool has_main_factor = false;
    std::vector<std::uint32_t> dlog;  // exponent of the main generator, kNonUnit off units
    std::vector<std::uint8_t> sign;   // 2^e, e>=3 only: the (-1)-component bit
};

std::uint64_t find_primitive_root(std::uint64_t p) {
    if (p == 2) return 1;
    Factorization fm1 = factorize(p - 1);
    for (std::uint64_t g = 2;; ++g) {
        bool ok = true;
        for (const auto& [ell, e] : fm1.factors) {
            (void)e;
            if (pow_mod(g, (p - 1) / ell, p) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
}

}  // namespace

class CharacterGroupData {
  public:
    std::uint64_t q = 1;
    Factorization fact;
    std::uint64_t phi = 1;
    std::vector<PrimePowerBlock> blocks;

    // Cyclic factors in enumeration order: blocks by increasing prime; the
    // 2-block contributes (sign, main) in that order.
    struct FactorRef {
        std::uint32_t block;
        bool is_sign;
        std::uint32_t order;
    };
    std::vector<FactorRef> factors;
    std::vector<std::uint32_t> factor_orders;
    std::vector<std::uint64_t> strides;  // mixed-radix strides, factors.back() fastest

    std::uint32_t M = 1;  // lcm of factor orders
    std::vector<std::complex<double>> roots_M;
    std::vector<std::complex<double>> roots_q;
    std::vector<std::uint8_t> unit;  // unit[r] = 1 iff gcd(r, q) = 1

    explicit CharacterGroupData(std::uint64_t modulus) {
        if (modulus == 0) throw std::invalid_argument("CharacterGroup: q must be positive");
        if (modulus > 10000000ull)
            throw std::invalid_argument("CharacterGroup: q capped at 10^7");
        q = modulus;
        fact = factorize(q);
        phi = euler_phi(fact);

        for (const auto& [p, e] : fact.factors) {
            PrimePowerBlock b;
            b.p = p;
            b.e = e;
            b.pe = 1;
            for (int i = 0; i < e; ++i) b.pe *= p;
            b.dlog.assign(b.pe, kNonUnit);
            if (p == 2) {
                if (e == 1) {
                    b.dlog[1] = 0;  // trivial unit group
                } else if (e == 2) {
                    b.generator = 3;
                    b.main_order = 2;
                    b.has_main_factor = true;
                    b.dlog[1] = 0;
                    b.dlog[3] = 1;
                } else {
                    b.generator = 5;
                    b.main_order = static_cast<std::uint32_t>(b.pe / 4);
                    b.has_sign_factor = true;
                    b.has_main_factor = true;
                    b.sign.assign(b.pe, 0);
                    std::uint64_t v = 1;
                    for (std::uint32_t j = 0; j < b.main_order; ++j) {
                        b.dlog[v] = j;
                        b.sign[v] = 0;
                        b.dlog[b.pe - v] = j;
                        b.sign[b.pe - v] = 1;
                        v = (v * 5) % b.pe;
                    }
                }
            } else {
                std::uint64_t g = find_primitive_root(p);
                if (e > 1 && pow_mod(g, p - 1, p * p) == 1) g += p;
                b.generator = g;
                b.main_order = static_cast<std::uint32_t>(b.pe / p * (p - 1));
                b.has_main_factor = true;
                std::uint64_t v = 1;
                for (std::uint32_t j = 0; j < b.main_order; ++j) {
                    b.dlog[v] = j;
                    v = mul_mod(v, g, b.pe);
                }
                if (v != 1) throw std::logic_error("CharacterGroup: generator order mismatch");
            }
            blocks.push_back(std::move(b));
        }

        for (std::uint32_t bi = 0; bi < blocks.size(); ++bi) {
            const auto& b = blocks[bi];
            if (b.has_sign_factor) factors.push_back({bi, true, 2});
            if (b.has_main_factor) factors.push_back({bi, false, b.main_order});
        }
        for (const auto& f : factors) factor_orders.push_back(f.order);

        strides.assign(factors.size(), 1);
        for (int i = static_cast<int>(factors.size()) - 2; i >= 0; --i)
            strides[i] = strides[i + 1] * factors[i + 1].order;

        M = 1;
        for (auto o : factor_orders) M = static_cast<std::uint32_t>(M / std::gcd(M, o) * o);

        roots_M.resize(M);
        for (std::uint32_t t = 0; t < M; ++t) {
            double ang = 2.0 * std::numbers::pi * t / M;
            roots_M[t] = {std::cos(ang), std::sin(ang)};
        }
        roots_q.resize(q);
        for (std::uint64_t a = 0; a < q; ++a) {
            double ang = 2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(q);
            roots_q[a] = {std::cos(ang), std::sin(ang)};
        }
        unit.assign(q, 1);
        if (q > 1) {
            unit[0] = 0;
            for (const auto& [p, e] : fact.factors) {
                (void)e;
                for (std::uint64_t r = 0; r < q; r += p) unit[r] = 0;
            }
        }
    }

    void decode_index(std::uint64_t index, std::vector<std::uint32_t>& exps) const {
        exps.resize(factors.size());
        for (std::size_t i = 0; i < factors.size(); ++i)
            exps[i] = static_cast<std::uint32_t>((index / strides[i]) % factors[i].order);
    }

    std::uint64_t encode_exponents(const std::vector<std::uint32_t>& exps) const {
        std::uint64_t idx = 0;
        for (std::size_t i = 0; i < factors.size(); ++i) idx += exps[i] * strides[i];
        return idx;
    }

    // Conductor of the character with the given exponent vector, one prime
    // power at a time: the p-part is p^(e - v_p(a)) for a nonzero exponent a
    // on the main factor (clamped to at least p, and to 4 resp. 8 for the
    // 2-block), 4 for the bare sign character, 1 for a trivial component.
    std::uint64_t conductor_of(const std::vector<std::uint32_t>& exps) const {
        std::uint64_t cond = 1;
        std::size_t fi = 0;
        for (const auto& b : blocks) {
            bool sign_bit = false;
            std::uint32_t a = 0;
            if (b.has_sign_factor) sign_bit = exps[fi++] != 0;
            if (b.has_main_factor) a = exps[fi++];
            if (b.p == 2) {
                if (a == 0) {
                    cond *= sign_bit ? 4 : 1;
                } else {
                    int v = 0;
                    std::uint32_t t = a;
                    while ((t & 1) == 0) {
                        t >>= 1;
                        ++v;
                    }
                    std::uint64_t c = 1;
                    for (int i = 0; i < b.e - v; ++i) c *= 2;
                    cond *= c;
                }
            } else {
                if (a == 0) continue;
                int v = 0;
                std::uint32_t t = a;
                while (t % b.p == 0 && v < b.e - 1) {
                    t /= static_cast<std::uint32_t>(b.p);
                    ++v;
                }
                std::uint64_t c = 1;
                for (int i = 0; i < b.e - v; ++i) c *= b.p;
                cond *= c;
            }
        }
        return cond;
    }

    // chi exponent of n as a power of e(1/M); n must be a unit mod q.
    std::uint32_t root_exponent(std::uint64_t n, const std::vector<std::uint32_t>& exps) const {
        std::uint64_t t = 0;
        std::size_t fi = 0;
        for (const auto& b : blocks) {
            std::uint64_t u = n % b.pe;
            if (b.has_sign_factor) {
                if (exps[fi] && b.sign[u]) t += M / 2;
                ++fi;
            }
            if (b.has_main_factor) {
                t += static_cast<std::uint64_t>(exps[fi]) * b.dlog[u] % b.main_order *
                     (M / b.main_order);
                ++fi;
            }
        }
        return static_cast<std::uint32_t>(t % M);
    }
};

// ---------------------------------------------------------------------------
// DirichletCharacter

bool DirichletCharacter::is_real() const {
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        std::uint32_t o = data_->factors[i].order;
        if ((2 * exponents_[i]) % o != 0) return false;
    }
    return true;
}

int DirichletCharacter::parity() const {
    if (q_ <= 2) return 1;
    std::complex<double> v = (*this)(q_ - 1);
    return v.real() > 0 ? 1 : -1;
}

std::complex<double> DirichletCharacter::operator()(std::uint64_t n) const {
    std::uint64_t r = n % q_;
    if (!data_->unit[r]) return {0.0, 0.0};
    return data_->roots_M[data_->root_exponent(r, exponents_)];
}

std::complex<double> DirichletCharacter::operator()(std::int64_t n) const {
    std::int64_t r = n % static_cast<std::int64_t>(q_);
    if (r < 0) r += static_cast<std::int64_t>(q_);
    return (*this)(static_cast<std::uint64_t>(r));
}

std::uint32_t DirichletCharacter::root_exponent(std::uint64_t n_mod_q) const {
    return data_->root_exponent(n_mod_q, exponents_);
}

std::uint32_t DirichletCharacter::root_order() const { return data_->M; }

std::uint64_t DirichletCharacter::conjugate_index() const {
    std::vector<std::uint32_t> conj(exponents_.size());
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        std::uint32_t o = data_->factors[i].order;
        conj[i] = exponents_[i] ? o - exponents_[i] : 0;
    }
    return data_->encode_exponents(conj);
}

DirichletCharacter DirichletCharacter::conjugate() const {
    DirichletCharacter chi;
    chi.data_ = data_;
    chi.q_ = q_;
    chi.index_ = conjugate_index();
    data_->decode_index(chi.index_, chi.exponents_);
    chi.conductor_ = conductor_;
    NeumaierCSum g;
    for (std::uint64_t a = 0; a < data_->q; ++a) {
        if (!data_->unit[a]) continue;
        g.add(data_->roots_M[data_->root_exponent(a, chi.exponents_)] * data_->roots_q[a]);
    }
    chi.gauss_sum_ = g.value();
    return chi;
}

// ---------------------------------------------------------------------------
// CharacterGroup

CharacterGroup::CharacterGroup(std::uint64_t q)
    : data_(std::make_shared<CharacterGroupData>(q)) {}

std::uint64_t CharacterGroup::modulus() const { return data_->q; }
std::uint64_t CharacterGroup::order() const { return data_->phi; }
const Factorization& CharacterGroup::factorization() const { return data_->fact; }
const std::vector<std::uint32_t>& CharacterGroup::factor_orders() const {
    return data_->factor_orders;
}
bool CharacterGroup::is_unit(std::uint64_t n_mod_q) const { return data_->unit[n_mod_q]; }
const std::vector<std::complex<double>>& CharacterGroup::unit_roots_mod_q() const {
    return data_->roots_q;
}

std::uint64_t CharacterGroup::conductor_of_index(std::uint64_t index) const {
    if (index >= data_->phi) throw std::out_of_range("CharacterGroup: character index out of range");
    std::vector<std::uint32_t> exps;
    data_->decode_index(index, exps);
    return data_->conductor_of(exps);
}

std::uint64_t CharacterGroup::primitive_count_by_enumeration() const {
    std::uint64_t count = 0;
    std::vector<std::uint32_t> exps;
    for (std::uint64_t i = 0; i < data_->phi; ++i) {
        data_->decode_index(i, exps);
        if (data_->conductor_of(exps) == data_->q) ++count;
    }
    return count;
}

DirichletCharacter CharacterGroup::character(std::uint64_t index) const {
    if (index >= data_->phi) throw std::out_of_range("CharacterGroup: character index out of range");
    DirichletCharacter chi;
    chi.data_ = data_;
    chi.q_ = data_->q;
    chi.index_ = index;
    data_->decode_index(index, chi.exponents_);
    chi.conductor_ = data_->conductor_of(chi.exponents_);

    // Gauss sum, cached eagerly so character objects stay immutable.
    NeumaierCSum g;
    for (std::uint64_t a = 0; a < data_->q; ++a) {
        if (!data_->unit[a]) continue;
        g.add(data_->roots_M[data_->root_exponent(a, chi.exponents_)] * data_->roots_q[a]);
    }
    chi.gauss_sum_ = g.value();
    return chi;
}

// ---------------------------------------------------------------------------

std::int64_t orthogonality_rhs(std::int64_t n, std::int64_t m, const Factorization& q) {
    std::int64_t qi = static_cast<std::int64_t>(q.value);
    std::int64_t nr = ((n % qi) + qi) % qi;
    std::int64_t mr = ((m % qi) + qi) % qi;
    if (gcd_u64(static_cast<std::uint64_t>(nr), q.value) != 1 ||
        gcd_u64(static_cast<std::uint64_t>(mr), q.value) != 1)
        throw std::invalid_argument("orthogonality_rhs: gcd(nm, q) must be 1");
    std::int64_t total = 0;
    for (std::uint64_t d : divisors(q)) {
        Factorization fd = factorize(d);
        if (mobius(fd) == 0) continue;
        std::uint64_t ell = q.value / d;
        if ((nr - mr) % static_cast<std::int64_t>(ell) != 0) continue;
        total += mobius(fd) * static_cast<std::int64_t>(euler_phi(factorize(ell)));
    }
    return total;
}

std::complex<double> root_number(const DirichletCharacter& chi, int weight) {
    if (weight % 2 != 0) throw std::invalid_argument("root_number: weight must be even");
    if (!chi.is_primitive()) throw std::invalid_argument("root_number: character must be primitive");
    std::complex<double> t = chi.gauss_sum();
    double ik = (weight % 4 == 0) ? 1.0 : -1.0;  // i^k for even k
    return ik * t * t / static_cast<double>(chi.modulus());
}

}  // namespace htm
