#include "htm/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "htm/eigenform.hpp"

namespace htm {

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
    while (b) {
        a %= b;
        std::swap(a, b);
    }
    return a;
}

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t r = m > 1 ? 1 : 0;
    base %= m;
    while (exp) {
        if (exp & 1) r = mul_mod(r, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return r;
}

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull})
        if (n % p == 0) return n == p;
    // Deterministic Miller-Rabin for 64-bit with the standard witness set.
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 0; i < r - 1; ++i) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

namespace {

std::uint64_t pollard_rho(std::uint64_t n) {
    if ((n & 1) == 0) return 2;
    std::uint64_t c = 1;
    while (true) {
        std::uint64_t x = 2, y = 2, d = 1;
        std::uint64_t saved = 1;
        int count = 0;
        auto step = [&](std::uint64_t v) { return (mul_mod(v, v, n) + c) % n; };
        while (d == 1) {
            x = step(x);
            y = step(step(y));
            std::uint64_t diff = x > y ? x - y : y - x;
            if (diff == 0) break;
            saved = mul_mod(saved, diff, n);
            if (++count == 64) {
                d = gcd_u64(saved, n);
                saved = 1;
                count = 0;
            }
        }
        if (d == 1) d = gcd_u64(saved, n);
        if (d != 1 && d != n) return d;
        ++c;  // rare cycle degeneracy: retry with a new increment
    }
}

void factor_into(std::uint64_t n, std::vector<std::uint64_t>& primes) {
    if (n == 1) return;
    if (is_prime_u64(n)) {
        primes.push_back(n);
        return;
    }
    std::uint64_t d = pollard_rho(n);
    factor_into(d, primes);
    factor_into(n / d, primes);
}

}  // namespace

Factorization factorize(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("factorize: n must be positive");
    Factorization f;
    f.value = n;
    if (n == 1) return f;

    auto strip = [&](std::uint64_t p) {
        if (n % p) return;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.factors.emplace_back(p, e);
    };
    strip(2);
    strip(3);
    strip(5);
    static constexpr int wheel[8] = {4, 2, 4, 2, 4, 6, 2, 6};
    std::uint64_t p = 7;
    int w = 0;
    while (p <= 1000000 && p * p <= n) {
        strip(p);
        p += wheel[w];
        w = (w + 1) & 7;
    }
    if (n > 1) {
        if (is_prime_u64(n)) {
            f.factors.emplace_back(n, 1);
        } else {
            std::vector<std::uint64_t> primes;
            factor_into(n, primes);
            std::sort(primes.begin(), primes.end());
            for (std::size_t i = 0; i < primes.size();) {
                std::size_t j = i;
                while (j < primes.size() && primes[j] == primes[i]) ++j;
                f.factors.emplace_back(primes[i], static_cast<int>(j - i));
                i = j;
            }
        }
    }
    return f;
}

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (num == 0) den = 1;
}

Rational operator*(const Rational& a, const Rational& b) {
    // Cross-reduce before multiplying to stay inside int64.
    std::int64_t an = a.num, ad = a.den, bn = b.num, bd = b.den;
    std::int64_t g1 = std::gcd(an < 0 ? -an : an, bd);
    std::int64_t g2 = std::gcd(bn < 0 ? -bn : bn, ad);
    return Rational((an / g1) * (bn / g2), (ad / g2) * (bd / g1));
}

std::int64_t mobius(const Factorization& f) {
    for (const auto& [p, e] : f.factors)
        if (e > 1) return 0;
    return (f.factors.size() % 2 == 0) ? 1 : -1;
}

std::uint64_t euler_phi(const Factorization& f) {
    std::uint64_t r = 1;
    for (const auto& [p, e] : f.factors) {
        r *= p - 1;
        for (int i = 1; i < e; ++i) r *= p;
    }
    return r;
}

std::vector<std::uint64_t> divisors(const Factorization& f) {
    std::vector<std::uint64_t> divs{1};
    for (const auto& [p, e] : f.factors) {
        std::size_t base = divs.size();
        std::uint64_t pk = 1;
        for (int i = 1; i <= e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < base; ++j) divs.push_back(divs[j] * pk);
        }
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

Rational psi(const Factorization& q) {
    Rational r(1, 1);
    for (const auto& [p, e] : q.factors) {
        if (e == 1)
            r = r * Rational(static_cast<std::int64_t>(p) - 2, static_cast<std::int64_t>(p));
        else {
            Rational f(static_cast<std::int64_t>(p) - 1, static_cast<std::int64_t>(p));
            r = r * f * f;
        }
    }
    return r;
}

std::uint64_t primitive_character_count(const Factorization& q) {
    std::uint64_t r = 1;
    for (const auto& [p, e] : q.factors) {
        if (e == 1) {
            r *= p - 2;
        } else {
            std::uint64_t t = (p - 1) * (p - 1);
            for (int i = 2; i < e; ++i) t *= p;
            r *= t;
        }
    }
    return r;
}

EulerProductValue euler_product_P(const Factorization& q, std::complex<double> s,
                                  const EigenformCoefficients& coeffs) {
    if (s.real() <= 0.5)
        throw std::domain_error("euler_product_P: requires Re(s) > 1/2");
    EulerProductValue out;
    std::complex<double> prod = 1.0;
    bool at_one = (s == std::complex<double>(1.0, 0.0));
    double logder = 0.0;
    for (const auto& [p, e] : q.factors) {
        (void)e;
        if (p > coeffs.length())
            throw std::out_of_range("euler_product_P: coefficient table shorter than largest prime factor");
        double ap = coeffs.a[p];
        double u = ap * ap - 2.0;
        std::complex<double> x = std::exp(-s * std::log(static_cast<double>(p)));
        std::complex<double> f1 = (1.0 - x) * (1.0 - x);
        std::complex<double> f2 = 1.0 - u * x + x * x;
        std::complex<double> f3 = 1.0 - x * x;
        prod *= f1 * f2 / f3;
        if (at_one) {
            // d/ds log of each factor, with x = p^-s and dx/ds = -log(p) x.
            double lp = std::log(static_cast<double>(p));
            double xr = 1.0 / static_cast<double>(p);
            logder += lp * (2.0 * xr / (1.0 - xr)
                            + (u * xr - 2.0 * xr * xr) / (1.0 - u * xr + xr * xr)
                            - 2.0 * xr * xr / (1.0 - xr * xr));
        }
    }
    out.at_s = prod;
    if (at_one) out.log_derivative_at_1 = logder;
    return out;
}

ConditionReport check_assumption(const Factorization& q) {
    if (q.value < 17)
        throw std::domain_error("check_assumption: q must be >= 17 (iterated logarithm domain)");
    ConditionReport rep;
    rep.q = q.value;
    double llq = std::log(std::log(static_cast<double>(q.value)));
    double lllq = std::log(llq);
    rep.x_threshold = std::exp(llq / (200.0 * lllq));
    double lhs = 0.0;
    for (const auto& [p, e] : q.factors) {
        (void)e;
        if (static_cast<double>(p) > rep.x_threshold) lhs += 1.0 / static_cast<double>(p);
    }
    rep.lhs = lhs;
    rep.rhs = std::pow(llq, -10.0);
    rep.holds = rep.lhs <= rep.rhs;
    return rep;
}

double divisor_condition_sum_with_threshold(const Factorization& q, double threshold) {
    if (q.value < 3) throw std::domain_error("divisor_condition_sum: q must be >= 3");
    // Enumerate squarefree divisors as subsets of the distinct primes.
    int nu = q.nu();
    if (nu > 30) throw std::domain_error("divisor_condition_sum: too many prime factors");
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << nu); ++mask) {
        double d = 1.0, weight = 1.0;
        for (int i = 0; i < nu; ++i) {
            if (mask & (1u << i)) {
                double p = static_cast<double>(q.factors[i].first);
                d *= p;
                weight *= 1.0 + 10.0 / std::sqrt(p);
            }
        }
        if (d >= threshold) total += weight / d;
    }
    return total;
}

double divisor_condition_sum(const Factorization& q) {
    double threshold = std::pow(std::log(static_cast<double>(q.value)), 0.05);
    return divisor_condition_sum_with_threshold(q, threshold);
}

double estimate_K(const EigenformCoefficients& coeffs, std::uint64_t cutoff) {
    if (cutoff == 0) throw std::invalid_argument("estimate_K: cutoff must be positive");
    if (cutoff > coeffs.length())
        throw std::out_of_range("estimate_K: cutoff exceeds coefficient table");
    double sum = 0.0, carry = 0.0;
    for (std::uint64_t n = 1; n <= cutoff; ++n) {
        double x = coeffs.a[n] * coeffs.a[n];
        double t = sum + x;
        carry += (std::abs(sum) >= std::abs(x)) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return 2.0 * (sum + carry) / static_cast<double>(cutoff);
}

double estimate_K_extrapolated(const EigenformCoefficients& coeffs, std::uint64_t cutoff) {
    double e1 = estimate_K(coeffs, cutoff);
    double e2 = estimate_K(coeffs, cutoff / 2);
    // Partial sums carry an O(x^(3/5)) remainder, so the estimator error
    // scales like x^(-2/5); eliminate that term.
    double lambda = std::pow(2.0, -0.4);
    return (e1 - lambda * e2) / (1.0 - lambda);
}

}  // namespace htm
