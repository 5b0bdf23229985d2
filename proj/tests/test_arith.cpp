#include <cmath>
#include <numeric>

#include "doctest.h"
#include "htm/arith.hpp"
#include "test_helpers.hpp"

using namespace htm;

TEST_CASE("factorize basics") {
    CHECK(factorize(1).factors.empty());
    auto f12 = factorize(12);
    CHECK(f12.factors == std::vector<std::pair<std::uint64_t, int>>{{2, 2}, {3, 1}});
    auto f360 = factorize(360);
    CHECK(f360.factors == std::vector<std::pair<std::uint64_t, int>>{{2, 3}, {3, 2}, {5, 1}});
    CHECK_THROWS_AS(factorize(0), std::invalid_argument);
}

TEST_CASE("factorize reconstructs the input") {
    std::uniform_int_distribution<std::uint64_t> dist(1, 1u << 30);
    for (int i = 0; i < 300; ++i) {
        std::uint64_t n = dist(test_rng());
        auto f = factorize(n);
        std::uint64_t prod = 1;
        std::uint64_t last_p = 0;
        for (auto [p, e] : f.factors) {
            CHECK(p > last_p);
            CHECK(e >= 1);
            CHECK(is_prime_u64(p));
            last_p = p;
            for (int j = 0; j < e; ++j) prod *= p;
        }
        CHECK(prod == n);
    }
}

TEST_CASE("factorize handles 63-bit inputs") {
    // large semiprime and prime power
    auto f = factorize(1000003ull * 1000033ull);
    CHECK(f.factors == std::vector<std::pair<std::uint64_t, int>>{{1000003, 1}, {1000033, 1}});
    auto g = factorize(std::uint64_t(1) << 62);
    CHECK(g.factors == std::vector<std::pair<std::uint64_t, int>>{{2, 62}});
    auto h = factorize(2305843009213693951ull);  // 2^61 - 1, prime
    CHECK(h.is_prime());
}

TEST_CASE("psi values and multiplicativity") {
    CHECK(psi(factorize(5)) == Rational(3, 5));
    CHECK(psi(factorize(8)) == Rational(1, 4));
    CHECK(psi(factorize(1)) == Rational(1, 1));
    CHECK(psi(factorize(2)) == Rational(0, 1));

    std::uniform_int_distribution<std::uint64_t> dist(1, 3000);
    int done = 0;
    while (done < 500) {
        std::uint64_t a = dist(test_rng()), b = dist(test_rng());
        if (std::gcd(a, b) != 1) continue;
        ++done;
        CHECK(psi(factorize(a * b)) == psi(factorize(a)) * psi(factorize(b)));
    }
}

TEST_CASE("q psi(q) is an exact integer for every q") {
    for (std::uint64_t q = 1; q <= 2000; ++q) {
        Rational r = psi(factorize(q));
        CHECK(static_cast<std::int64_t>(q) % r.den == 0);
        CHECK(primitive_character_count(factorize(q)) ==
              static_cast<std::uint64_t>(static_cast<std::int64_t>(q) / r.den * r.num));
    }
}

TEST_CASE("euler product P_q") {
    const auto& coeffs = test_delta();
    SUBCASE("empty product at q = 1") {
        std::uniform_real_distribution<double> re(0.6, 3.0), im(-5.0, 5.0);
        for (int i = 0; i < 100; ++i) {
            auto v = euler_product_P(factorize(1), {re(test_rng()), im(test_rng())}, coeffs);
            CHECK(v.at_s == std::complex<double>(1.0, 0.0));
        }
    }
    SUBCASE("exact rational value at q = 2, s = 1") {
        // a(2)^2 = 576/2^11 = 9/32, so the local factor is
        // (1/2)^2 (1 + 55/64 + 1/4) / (3/4) = 45/64
        auto v = euler_product_P(factorize(2), 1.0, coeffs);
        CHECK(v.at_s.real() == doctest::Approx(45.0 / 64.0).epsilon(1e-14));
        CHECK(v.log_derivative_at_1.has_value());
    }
    SUBCASE("q = 6 splits into p = 2 and p = 3 factors") {
        auto v6 = euler_product_P(factorize(6), 1.0, coeffs);
        auto v2 = euler_product_P(factorize(2), 1.0, coeffs);
        auto v3 = euler_product_P(factorize(3), 1.0, coeffs);
        CHECK(v6.at_s.real() == doctest::Approx(v2.at_s.real() * v3.at_s.real()).epsilon(1e-14));
    }
    SUBCASE("domain errors") {
        CHECK_THROWS_AS(euler_product_P(factorize(2), {0.4, 0.0}, coeffs), std::domain_error);
    }
    SUBCASE("log derivative matches a central finite difference") {
        std::uniform_int_distribution<std::uint64_t> dist(2, 10000);
        const double h = 1e-6;
        for (int i = 0; i < 50; ++i) {
            auto qf = factorize(dist(test_rng()));
            auto v = euler_product_P(qf, 1.0, coeffs);
            double p1 = v.at_s.real();
            double up = euler_product_P(qf, 1.0 + h, coeffs).at_s.real();
            double dn = euler_product_P(qf, 1.0 - h, coeffs).at_s.real();
            double fd = (up - dn) / (2.0 * h * p1);
            CHECK(*v.log_derivative_at_1 ==
                  doctest::Approx(fd).epsilon(1e-4).scale(std::abs(fd) + 1.0));
        }
    }
}

TEST_CASE("sparse-prime condition report") {
    SUBCASE("large prime q") {
        auto r = check_assumption(factorize(1000003));
        CHECK(r.lhs == doctest::Approx(1.0 / 1000003.0));
        double llq = std::log(std::log(1000003.0));
        CHECK(r.rhs == doctest::Approx(std::pow(llq, -10.0)));
        CHECK(r.holds == (r.lhs <= r.rhs));
    }
    SUBCASE("power of two") {
        auto r = check_assumption(factorize(std::uint64_t(1) << 30));
        CHECK(r.lhs == doctest::Approx(0.5));  // x is barely above 1, so p = 2 counts
        CHECK_FALSE(r.holds);
    }
    SUBCASE("too small") { CHECK_THROWS_AS(check_assumption(factorize(16)), std::domain_error); }
}

TEST_CASE("divisor condition sum") {
    SUBCASE("prime q: divisors 1 and p, threshold excludes 1") {
        for (std::uint64_t p : {3ull, 7ull, 101ull}) {
            double expect = (1.0 + 10.0 / std::sqrt(double(p))) / double(p);
            CHECK(divisor_condition_sum(factorize(p)) == doctest::Approx(expect).epsilon(1e-14));
        }
    }
    SUBCASE("q = 4 keeps only d = 2") {
        double expect = (1.0 + 10.0 / std::sqrt(2.0)) / 2.0;
        CHECK(divisor_condition_sum(factorize(4)) == doctest::Approx(expect).epsilon(1e-14));
    }
    SUBCASE("q = p^2 equals q = p with the doubled-log threshold") {
        CHECK(divisor_condition_sum(factorize(49)) ==
              doctest::Approx((1.0 + 10.0 / std::sqrt(7.0)) / 7.0).epsilon(1e-14));
    }
    SUBCASE("monotone nonincreasing in the threshold") {
        for (std::uint64_t q : {60ull, 210ull, 1024ull, 9699690ull}) {
            auto qf = factorize(q);
            double prev = divisor_condition_sum_with_threshold(qf, 1.0);
            for (double thr : {1.5, 2.0, 3.0, 7.0, 50.0, 1e6}) {
                double cur = divisor_condition_sum_with_threshold(qf, thr);
                CHECK(cur <= prev + 1e-15);
                prev = cur;
            }
        }
    }
    SUBCASE("q too small") { CHECK_THROWS_AS(divisor_condition_sum(factorize(2)), std::domain_error); }
}

TEST_CASE("K estimator") {
    SUBCASE("synthetic a(n) = 1 gives exactly 2") {
        EigenformCoefficients flat;
        flat.weight = 12;
        flat.a.assign(100001, 1.0);
        flat.a[0] = 0.0;
        CHECK(estimate_K(flat, 100000) == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("delta estimates at two cutoffs agree within 2 percent") {
        const auto& coeffs = test_delta();
        double e1 = estimate_K(coeffs, 100000);
        double e2 = estimate_K(coeffs, 400000);
        CHECK(std::abs(e1 - e2) / e2 < 0.02);
    }
    SUBCASE("domain edges") {
        const auto& coeffs = test_delta();
        CHECK_THROWS_AS(estimate_K(coeffs, 0), std::invalid_argument);
        CHECK_THROWS_AS(estimate_K(coeffs, coeffs.length() + 1), std::out_of_range);
    }
}
