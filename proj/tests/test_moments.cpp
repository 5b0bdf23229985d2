#include <cmath>

#include "doctest.h"
#include "htm/lvalue.hpp"
#include "htm/moments.hpp"
#include "htm/report_io.hpp"
#include "test_helpers.hpp"

using namespace htm;

TEST_CASE("route equivalence at small moduli") {
    const auto& coeffs = test_delta();
    for (std::uint64_t q : {5ull, 12ull, 45ull}) {
        double direct = second_moment_direct(coeffs, q, 1e-6, 1);
        auto parts = second_moment_double_sum(coeffs, q, 1e-6, 1);
        CHECK(direct >= 0.0);
        CHECK(parts.total >= -1e-6 * std::abs(direct) - 1e-9);
        CHECK(std::abs(direct - parts.total) <= 1e-6 * direct);
    }
}

TEST_CASE("moment vanishes when no primitive characters exist") {
    const auto& coeffs = test_delta();
    // q = 6: psi(6) = 0; both routes must agree on (numerically) zero
    double direct = second_moment_direct(coeffs, 6, 1e-6, 1);
    auto parts = second_moment_double_sum(coeffs, 6, 1e-6, 1);
    CHECK(direct == 0.0);
    CHECK(std::abs(parts.total) <= 1e-7 * std::abs(parts.small_part));
}

TEST_CASE("forced vanishing at q = 4 (odd quadratic twist)") {
    const auto& coeffs = test_delta();
    double direct = second_moment_direct(coeffs, 4, 1e-6, 1);
    CHECK(direct >= 0.0);
    CHECK(direct <= 1e-10);
}

TEST_CASE("divisor partition is exact") {
    const auto& coeffs = test_delta();
    for (std::uint64_t q : {45ull, 100ull}) {
        auto parts = second_moment_double_sum(coeffs, q, 1e-6, 1);
        CHECK(parts.total == parts.small_part + parts.large_part);
        CHECK(std::abs(parts.small_part - (parts.diagonal_part + parts.off_diagonal_part)) <=
              1e-12 * (std::abs(parts.small_part) + 1.0));
    }
}

TEST_CASE("small-divisor side is d = 1 alone for prime q > e") {
    const auto& coeffs = test_delta();
    auto parts = second_moment_double_sum(coeffs, 13, 1e-6, 1);
    CHECK(parts.small_divisor_count == 1);
}

TEST_CASE("mu(4) = 0 removes the d = 4 stratum") {
    const auto& coeffs = test_delta();
    // q = 4 has divisors {1, 2, 4}; only d = 1 and d = 2 contribute terms,
    // and both land on the large side or small side by the threshold alone.
    auto parts = second_moment_double_sum(coeffs, 4, 1e-6, 1);
    CHECK(parts.small_divisor_count == 1);  // threshold (log 4)^0.05 ~ 1.016
    CHECK(std::isfinite(parts.total));
}

TEST_CASE("collapsed sweep matches per-character AFE values") {
    const auto& coeffs = test_delta();
    std::uint64_t q = 5;
    CharacterGroup G(q);
    double direct = second_moment_direct(coeffs, q, 1e-8, 1);
    double by_afe = 0.0;
    for (std::uint64_t i = 0; i < G.order(); ++i) {
        auto chi = G.character(i);
        if (!chi.is_primitive()) continue;
        by_afe += std::norm(l_value_afe(coeffs, chi, 0.0, 1e-9).value);
    }
    CHECK(direct == doctest::Approx(by_afe).epsilon(1e-8));
}

TEST_CASE("diagonal sum tracks its predicted leading term at moderate q") {
    const auto& coeffs = test_delta();
    double leading = 0.0;
    double diag = diagonal_sum(coeffs, 211, 1e-8, &leading);
    CHECK(leading > 0.0);
    CHECK(diag > 0.0);
    CHECK(diag / leading > 0.5);
    CHECK(diag / leading < 2.0);
}

TEST_CASE("main term scales exactly as K P psi q log q") {
    const auto& coeffs = test_delta();
    for (std::uint64_t q : {13ull, 45ull, 100ull}) {
        auto qf = factorize(q);
        double K = estimate_K_extrapolated(coeffs, 400000);
        double expect = K * euler_product_P(qf, 1.0, coeffs).at_s.real() *
                        psi(qf).to_double() * double(q) * std::log(double(q));
        CHECK(main_term(coeffs, q) == doctest::Approx(expect).epsilon(1e-14));
        CHECK(main_term(coeffs, q, 2.0) ==
              doctest::Approx(expect / K * 2.0).epsilon(1e-14));
    }
}

TEST_CASE("moment report fields and determinism across thread counts") {
    const auto& coeffs = test_delta();
    auto rep1 = moment_report(coeffs, 45, 1e-6, 1);
    auto rep3 = moment_report(coeffs, 45, 1e-6, 3);

    CHECK(rep1.q == 45);
    CHECK(rep1.direct >= 0.0);
    CHECK(rep1.double_sum == rep1.small_divisor_part + rep1.large_divisor_part);
    CHECK(rep1.ratio == rep1.direct / rep1.main_term);
    CHECK(std::isfinite(rep1.condition_lhs));  // q >= 17: condition computable
    CHECK(rep1.divisor_condition_sum > 0.0);

    CHECK(reports_equal(rep1, rep3));
    CHECK(moment_report_to_json(rep1) == moment_report_to_json(rep3));

    auto rep5 = moment_report(coeffs, 5, 1e-6, 2);
    CHECK(std::isnan(rep5.condition_lhs));  // q < 17: iterated log domain
    CHECK(rep5.condition_holds == false);
}

TEST_CASE("K override changes only the override ratio") {
    const auto& coeffs = test_delta();
    auto rep = moment_report(coeffs, 45, 1e-6, 1, 1.0);
    REQUIRE(rep.ratio_with_K_override.has_value());
    CHECK(*rep.ratio_with_K_override ==
          doctest::Approx(rep.ratio * rep.K_used / 1.0).epsilon(1e-12));
}

TEST_CASE("full-group moment dominates the primitive moment") {
    const auto& coeffs = test_delta();
    for (std::uint64_t q : {12ull, 45ull}) {
        double full = full_group_second_moment(coeffs, q, 1e-6, 1);
        double prim = second_moment_direct(coeffs, q, 1e-6, 1);
        CHECK(full >= prim - 1e-9);
        double cap = 100.0 * double(q) * std::log(double(q)) * std::log(std::log(double(q)));
        CHECK(full <= cap);
    }
}

TEST_CASE("moment rejects q < 3") {
    const auto& coeffs = test_delta();
    CHECK_THROWS_AS(second_moment_direct(coeffs, 2, 1e-6, 1), std::invalid_argument);
    CHECK_THROWS_AS(moment_report(coeffs, 1, 1e-6, 1), std::invalid_argument);
}
