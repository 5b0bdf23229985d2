// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// fail.  Heavy runs share one delta coefficient table, cached on disk next
// to the build so reruns are fast.
//
//   acceptance [--cache-dir DIR] [--criterion K] [--list]

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "htm/arith.hpp"
#include "htm/characters.hpp"
#include "htm/eigenform.hpp"
#include "htm/lvalue.hpp"
#include "htm/moments.hpp"
#include "htm/parallel.hpp"
#include "htm/report_io.hpp"
#include "htm/special_functions.hpp"

using namespace htm;
using cplx = std::complex<double>;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kTableLength = 6000000;  // exact tau stays inside int128 here

std::string g_cache_dir = ".";
EigenformCoefficients g_coeffs;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

const EigenformCoefficients& shared_table() {
    if (g_coeffs.length() >= kTableLength) return g_coeffs;
    std::string path = g_cache_dir + "/tau_acceptance.bin";
    std::ifstream probe(path);
    if (probe.good()) {
        try {
            auto cached = load_tau_cache(path);
            if (cached.length() >= kTableLength && cached.weight == 12) {
                g_coeffs = std::move(cached);
                return g_coeffs;
            }
        } catch (const std::exception& e) {
            std::fprintf(stderr, "  (cache reload failed: %s; rebuilding)\n", e.what());
        }
    }
    std::fprintf(stderr, "  building delta coefficient table (N = %llu, one-time)...\n",
                 static_cast<unsigned long long>(kTableLength));
    auto t0 = Clock::now();
    g_coeffs = delta_coefficients(kTableLength);
    std::fprintf(stderr, "  table built in %.1fs\n", seconds_since(t0));
    try {
        save_tau_cache(path, g_coeffs);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "  (cache save failed: %s)\n", e.what());
    }
    return g_coeffs;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
};

// 1. primitive-character census against q psi(q), 3 <= q <= 2000
bool crit_census(std::string& detail) {
    auto t0 = Clock::now();
    for (std::uint64_t q = 3; q <= 2000; ++q) {
        CharacterGroup G(q);
        std::uint64_t enumerated = G.primitive_count_by_enumeration();
        std::uint64_t formula = primitive_character_count(factorize(q));
        if (enumerated != formula) {
            detail = "mismatch at q = " + std::to_string(q);
            return false;
        }
    }
    double dt = seconds_since(t0);
    detail = "all q in [3, 2000] exact, " + sci(dt) + "s";
    return dt < 60.0;
}

// 2. | |tau(chi)|^2 - q | <= 1e-8 q for every primitive chi, q <= 500
bool crit_gauss_modulus(std::string& detail) {
    auto t0 = Clock::now();
    double worst = 0.0;
    for (std::uint64_t q = 1; q <= 500; ++q) {
        CharacterGroup G(q);
        for (std::uint64_t i = 0; i < G.order(); ++i) {
            auto chi = G.character(i);
            if (!chi.is_primitive()) continue;
            double err = std::abs(std::norm(chi.gauss_sum()) - double(q)) / double(q);
            worst = std::max(worst, err);
            if (err > 1e-8) {
                detail = "q = " + std::to_string(q) + " index " + std::to_string(i);
                return false;
            }
        }
    }
    double dt = seconds_since(t0);
    detail = "worst relative error " + sci(worst) + ", " + sci(dt) + "s";
    return dt < 120.0;
}

// 3. orthogonality identity on 1000 random (q <= 300, gcd(nm, q) = 1)
bool crit_orthogonality(std::string& detail) {
    std::mt19937_64 rng(20260809);
    std::uniform_int_distribution<std::uint64_t> qd(2, 300);
    int done = 0;
    double worst = 0.0;
    while (done < 1000) {
        std::uint64_t q = qd(rng);
        std::uniform_int_distribution<std::uint64_t> nd(1, 5 * q);
        std::uint64_t n = nd(rng), m = nd(rng);
        if (std::gcd(n, q) != 1 || std::gcd(m, q) != 1) continue;
        ++done;
        CharacterGroup G(q);
        cplx lhs = 0.0;
        for (std::uint64_t i = 0; i < G.order(); ++i) {
            auto chi = G.character(i);
            if (!chi.is_primitive()) continue;
            lhs += chi(n) * std::conj(chi(m));
        }
        double rhs = double(orthogonality_rhs(std::int64_t(n), std::int64_t(m), factorize(q)));
        double err = std::abs(lhs - cplx(rhs, 0.0));
        double scale = 1e-8 * double(euler_phi(factorize(q))) + 1e-12;
        worst = std::max(worst, err / scale);
        if (err > scale) {
            detail = "q=" + std::to_string(q) + " n=" + std::to_string(n) +
                     " m=" + std::to_string(m);
            return false;
        }
    }
    detail = "1000 triples, worst error at " + sci(worst) + " of tolerance";
    return true;
}

// 4. tau integrity: eta-product values, multiplicativity, Deligne scan
bool crit_tau(std::string& detail) {
    const auto& coeffs = shared_table();
    if (coeffs.tau[1] != 1 || coeffs.tau[2] != -24 || coeffs.tau[3] != 252) {
        detail = "eta-product anchor values wrong";
        return false;
    }
    // independent oracle: naive expansion of x prod (1 - x^n)^24
    {
        const std::size_t n_small = 64;
        std::vector<long long> poly(n_small, 0);
        poly[0] = 1;
        for (std::size_t n = 1; n < n_small; ++n)
            for (int rep = 0; rep < 24; ++rep)
                for (std::size_t j = n_small; j-- > n;) poly[j] -= poly[j - n];
        for (std::size_t n = 1; n <= n_small; ++n)
            if (static_cast<long long>(coeffs.tau[n]) != poly[n - 1]) {
                detail = "naive expansion mismatch at n = " + std::to_string(n);
                return false;
            }
    }
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::uint64_t> dist(2, 1000);
    int done = 0;
    while (done < 10000) {
        std::uint64_t m = dist(rng), n = dist(rng);
        if (std::gcd(m, n) != 1 || m * n > 100000) continue;
        ++done;
        if (coeffs.tau[m * n] != coeffs.tau[m] * coeffs.tau[n]) {
            detail = "multiplicativity fails at (" + std::to_string(m) + ", " +
                     std::to_string(n) + ")";
            return false;
        }
    }
    auto d = divisor_count_sieve(100000);
    for (std::uint64_t n = 1; n <= 100000; ++n)
        if (std::abs(coeffs.a[n]) > double(d[n]) + 1e-12) {
            detail = "Deligne bound fails at n = " + std::to_string(n);
            return false;
        }
    detail = "anchors, 10^4 coprime pairs, Deligne scan to 10^5";
    return true;
}

// 5. kernel limits and contour invariance
bool crit_kernels(std::string& detail) {
    // residue oracles: shift across y = 0 only and add the residue back
    KernelParams left_v;
    left_v.c = -0.25;
    double v_oracle = 2.0 + kernel_v(1e-8, 12, left_v);
    double v0 = kernel_v(1e-8, 12);
    if (std::abs(v0 - 2.0) > 1e-6 || std::abs(v0 - v_oracle) > 1e-8) {
        detail = "V(1e-8) limit failed";
        return false;
    }
    KernelParams left_w;
    left_w.c = -0.5;
    cplx w_oracle = 1.0 + kernel_w(0.0, 1e-8, 12, left_w);
    cplx w0 = kernel_w(0.0, 1e-8, 12);
    if (std::abs(w0 - 1.0) > 1e-6 || std::abs(w0 - w_oracle) > 1e-8) {
        detail = "W_0(1e-8) limit failed";
        return false;
    }
    double worst = 0.0;
    for (double x : {0.01, 1.0, 10.0}) {
        double base_v = kernel_v(x, 12);
        cplx base_w = kernel_w(0.0, x, 12);
        KernelParams fine;
        fine.h = 0.025;
        worst = std::max(worst, std::abs(kernel_v(x, 12, fine) - base_v));
        KernelParams fine_w;
        fine_w.h = 0.01;
        worst = std::max(worst, std::abs(kernel_w(0.0, x, 12, fine_w) - base_w));
        KernelParams tall;
        tall.T = 70.0;
        tall.c = (x < 0.5) ? 0.5 : (x < 5.0 ? 2.0 : 8.0);
        worst = std::max(worst, std::abs(kernel_v(x, 12, tall) - base_v));
        KernelParams tall_w;
        tall_w.T = 13.0;
        worst = std::max(worst, std::abs(kernel_w(0.0, x, 12, tall_w) - base_w));
        KernelParams shift_c;
        shift_c.c = (x < 0.5) ? 0.75 : 1.5;
        worst = std::max(worst, std::abs(kernel_v(x, 12, shift_c) - base_v));
        worst = std::max(worst, std::abs(kernel_w(0.0, x, 12, shift_c) - base_w));
    }
    if (worst > 1e-10) {
        detail = "perturbation moved a kernel by " + sci(worst);
        return false;
    }
    detail = "limits 2 and 1 hit; worst perturbation drift " + sci(worst);
    return true;
}

// 6. functional equation residual <= 1e-6 on 50 random (q, chi, s)
bool crit_fe(std::string& detail) {
    auto t0 = Clock::now();
    const auto& coeffs = shared_table();
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::uint64_t> qd(3, 200);
    const cplx s_choices[3] = {cplx(0.0, 0.0), cplx(0.0, 0.3), cplx(0.0, 1.0)};
    double worst = 0.0;
    int done = 0;
    while (done < 50) {
        std::uint64_t q = qd(rng);
        CharacterGroup G(q);
        if (primitive_character_count(G.factorization()) == 0) continue;
        std::uniform_int_distribution<std::uint64_t> idx(0, G.order() - 1);
        auto chi = G.character(idx(rng));
        if (!chi.is_primitive()) continue;
        cplx s = s_choices[done % 3];
        ++done;
        double r = fe_residual(coeffs, chi, s, 1e-6);
        worst = std::max(worst, r);
        if (r > 1e-6) {
            detail = "residual " + sci(r) + " at q = " + std::to_string(q);
            return false;
        }
    }
    double dt = seconds_since(t0);
    detail = "50 cases, worst residual " + sci(worst) + ", " + sci(dt) + "s";
    return dt < 600.0;
}

// 7. forced central zero at q = 3
bool crit_forced_zero(std::string& detail) {
    const auto& coeffs = shared_table();
    CharacterGroup G(3);
    auto chi = G.character(1);
    if (std::abs(root_number(chi, 12) - cplx(-1.0, 0.0)) > 1e-10) {
        detail = "root number of the quadratic character mod 3 is not -1";
        return false;
    }
    auto r = l_value_afe(coeffs, chi, 0.0, 1e-8);
    detail = "|L| = " + sci(std::abs(r.value));
    return std::abs(r.value) <= 1e-6;
}

// 8. route equivalence: direct sweep vs orthogonality double sum
bool crit_routes(std::string& detail) {
    const auto& coeffs = shared_table();
    const unsigned threads = default_thread_count();
    detail.clear();
    for (std::uint64_t q : {12ull, 45ull, 100ull, 211ull, 1009ull}) {
        auto t0 = Clock::now();
        // At q = 1009 the internal worst-case bound certifies
        // 0.5 * 1.5e-6 * (moment scale), i.e. relative ~7e-7 -- inside the
        // 1e-6 gate; the measured gap sits orders below the bound.
        double tol = (q <= 211) ? 5e-7 : 1.5e-6;
        double direct = second_moment_direct(coeffs, q, tol, threads);
        auto parts = second_moment_double_sum(coeffs, q, tol, threads);
        double rel = std::abs(direct - parts.total) / direct;
        double dt = seconds_since(t0);
        detail += "q=" + std::to_string(q) + ": rel " + sci(rel) + " (" + sci(dt) + "s)  ";
        if (rel > 1e-6) return false;
        if (q == 1009 && dt > 1800.0) return false;
    }
    return true;
}

// 9. asymptotic surrogate: ratio to the main term for primes 211, 1009, 3001
bool crit_ratio(std::string& detail) {
    const auto& coeffs = shared_table();
    const unsigned threads = default_thread_count();
    double ratios[3];
    int i = 0;
    for (std::uint64_t q : {211ull, 1009ull, 3001ull}) {
        double tol = (q <= 211) ? 5e-7 : (q <= 1009 ? 1.5e-6 : 1e-4);
        double direct = second_moment_direct(coeffs, q, tol, threads);
        double mt = main_term(coeffs, q);
        ratios[i++] = direct / mt;
    }
    detail = "ratios " + std::to_string(ratios[0]) + ", " + std::to_string(ratios[1]) + ", " +
             std::to_string(ratios[2]);
    for (double r : ratios)
        if (r < 0.6 || r > 1.4) return false;
    bool nonincreasing = std::abs(ratios[1] - 1.0) <= std::abs(ratios[0] - 1.0) + 1e-12 &&
                         std::abs(ratios[2] - 1.0) <= std::abs(ratios[1] - 1.0) + 1e-12;
    bool tight = true;
    for (double r : ratios) tight = tight && (r >= 0.75 && r <= 1.25);
    return nonincreasing || tight;
}

// 10. full-group second moment stays under 100 q log q log log q
bool crit_upper_bound(std::string& detail) {
    const auto& coeffs = shared_table();
    const unsigned threads = default_thread_count();
    detail.clear();
    for (std::uint64_t q : {211ull, 1009ull}) {
        // the cap is ~180x above the actual sum, so 1e-4 per-L accuracy is
        // orders beyond what the comparison needs
        double full = full_group_second_moment(coeffs, q, 1e-4, threads);
        double cap = 100.0 * double(q) * std::log(double(q)) * std::log(std::log(double(q)));
        detail += "q=" + std::to_string(q) + ": " + sci(full) + " vs cap " + sci(cap) + "  ";
        if (!(full <= cap)) return false;
    }
    return true;
}

// 11. K estimator stability between cutoffs 2e5 and 4e5
bool crit_K(std::string& detail) {
    const auto& coeffs = shared_table();
    double e1 = estimate_K(coeffs, 200000);
    double e2 = estimate_K(coeffs, 400000);
    double rel = std::abs(e1 - e2) / e2;
    detail = "K(2e5) = " + std::to_string(e1) + ", K(4e5) = " + std::to_string(e2) +
             ", rel " + std::to_string(rel);
    return rel < 0.02;
}

// 12. byte-identical reports across thread counts 1, 4, 8
bool crit_determinism(std::string& detail) {
    const auto& coeffs = shared_table();
    auto r1 = moment_report(coeffs, 211, 5e-7, 1);
    auto r4 = moment_report(coeffs, 211, 5e-7, 4);
    auto r8 = moment_report(coeffs, 211, 5e-7, 8);
    std::string j1 = moment_report_to_json(r1);
    std::string j4 = moment_report_to_json(r4);
    std::string j8 = moment_report_to_json(r8);
    detail = (j1 == j4 && j4 == j8) ? "reports byte-identical for threads 1/4/8"
                                    : "reports differ across thread counts";
    return j1 == j4 && j4 == j8;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--cache-dir") && i + 1 < argc) g_cache_dir = argv[++i];
        else if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) only = std::atoi(argv[++i]);
        else if (!std::strcmp(argv[i], "--list")) only = -1;
    }

    std::vector<Criterion> criteria = {
        {1, "primitive-character census equals q psi(q), 3 <= q <= 2000", crit_census},
        {2, "Gauss sum modulus sqrt(q) for primitive chi, q <= 500", crit_gauss_modulus},
        {3, "orthogonality identity on 1000 random triples", crit_orthogonality},
        {4, "tau integrity: anchors, multiplicativity, Deligne scan", crit_tau},
        {5, "kernel limits V -> 2, W -> 1 and contour invariance", crit_kernels},
        {6, "functional equation residual <= 1e-6 on 50 random cases", crit_fe},
        {7, "forced central zero of the odd quadratic twist mod 3", crit_forced_zero},
        {8, "direct sweep vs orthogonality double sum, rel <= 1e-6", crit_routes},
        {9, "moment / main-term ratio window and trend", crit_ratio},
        {10, "full-group moment below 100 q log q log log q", crit_upper_bound},
        {11, "K estimator stable between cutoffs 2e5 and 4e5", crit_K},
        {12, "byte-identical reports across thread counts", crit_determinism},
    };

    if (only == -1) {
        for (const auto& c : criteria) std::printf("%2d  %s\n", c.id, c.name);
        return 0;
    }

    int failures = 0;
    for (auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        std::string detail;
        bool ok = false;
        auto t0 = Clock::now();
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                    seconds_since(t0), detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    else std::printf("all criteria passed\n");
    return failures ? 1 : 0;
}
