#include "htm/moments.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "htm/lvalue.hpp"
#include "htm/parallel.hpp"
#include "htm/special_functions.hpp"

namespace htm {

namespace {

constexpr double kTwoGamma = 1.1544313298030657;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Envelope integrals over the W_0 knot grid:
//   inner(N)  = int_0^{N/q} (log qu + 2g) u^{-1/2} |W| du
//   outer(N)  = int_{N/q}^inf ...
// feeding the moment-level truncation bound below.
struct TailIntegrals {
    double inner = 0.0;
    double outer = 0.0;
    double outer_sq = 0.0;  // same with |W|^2 / u (diagonal tail)
};

TailIntegrals w_tail_integrals(const KernelTable& w, std::uint64_t q, std::uint64_t N) {
    const double step = std::log(1.002);
    TailIntegrals t;
    double x0 = static_cast<double>(N) / static_cast<double>(q);
    double lx = std::log(w.x_min());
    double lmax = std::log(w.x_max());
    while (lx < lmax) {
        double u = std::exp(lx);
        double du = u * (std::exp(step) - 1.0);
        double env = w.tail_envelope(u);
        if (env <= 0.0) break;
        double dn = std::log(std::max(static_cast<double>(q) * u, 2.0)) + kTwoGamma;
        double common = dn / std::sqrt(u) * env * du;
        if (u < x0)
            t.inner += common;
        else {
            t.outer += common;
            t.outer_sq += dn * dn / u * env * env * du;
        }
        lx += step;
    }
    return t;
}

// Rough moment scale K q psi(q) P_q(1) log q used to convert the relative
// tolerance into an absolute budget.
double moment_scale(const EigenformCoefficients& coeffs, const Factorization& qf) {
    std::uint64_t cutoff = std::min<std::uint64_t>(coeffs.length(), 100000);
    double k_est = estimate_K(coeffs, cutoff);
    double p1 = euler_product_P(qf, 1.0, coeffs).at_s.real();
    double scale = k_est * p1 * psi(qf).to_double() * static_cast<double>(qf.value) *
                   std::log(static_cast<double>(qf.value));
    return std::max(scale, 1e-3);
}

// Truncation for the character sweep.  The cross-term bound is sharpened
// with the actual |a(n)| partial sums (exact within the table, divisor
// envelope beyond), distributing the m-sum over residues mod q/d; a 2x
// factor absorbs the equidistribution slack.  Checkpoints are geometric, so
// the chosen N is deterministic.
std::uint64_t direct_truncation(const EigenformCoefficients& coeffs, const Factorization& qf,
                                double tol, const KernelTable& w) {
    const std::uint64_t q = qf.value;
    const std::uint64_t L = coeffs.length();
    const double budget = 0.5 * tol * moment_scale(coeffs, qf);

    // sum_d |mu(d)| phi(q/d) d / q  (cross-term congruence densities)
    double density = 0.0;
    for (std::uint64_t d : divisors(qf)) {
        Factorization fd = factorize(d);
        if (mobius(fd) == 0) continue;
        density += static_cast<double>(euler_phi(factorize(q / d))) * static_cast<double>(d) /
                   static_cast<double>(q);
    }

    // Prefix sums of |a(n)| n^(-1/2) |W(n/q)| and of a(n)^2 W(n/q)^2 / n at
    // geometric checkpoints.
    std::vector<std::uint64_t> checkpoints;
    for (std::uint64_t n = q; n < L; n += std::max<std::uint64_t>(1, n / 8))
        checkpoints.push_back(n);
    checkpoints.push_back(L);
    std::vector<double> prefix_abs(checkpoints.size()), prefix_sq(checkpoints.size());
    {
        NeumaierSum abs_acc, sq_acc;
        std::uint64_t n = 1;
        const double invq = 1.0 / static_cast<double>(q);
        for (std::size_t ci = 0; ci < checkpoints.size(); ++ci) {
            for (; n <= checkpoints[ci]; ++n) {
                double env = w.tail_envelope(static_cast<double>(n) * invq);
                if (env == 0.0) {
                    n = checkpoints[ci] + 1;
                    break;
                }
                double term = std::abs(coeffs.a[n]) / std::sqrt(static_cast<double>(n)) * env;
                abs_acc.add(term);
                sq_acc.add(term * term);
            }
            prefix_abs[ci] = abs_acc.value();
            prefix_sq[ci] = sq_acc.value();
        }
    }
    // Divisor-envelope estimates for the part of the kernel support beyond
    // the table.
    TailIntegrals beyond = w_tail_integrals(w, q, L);
    const double prim_count = static_cast<double>(primitive_character_count(qf));

    for (std::size_t ci = 0; ci < checkpoints.size(); ++ci) {
        std::uint64_t N = checkpoints[ci];
        double s_in = prefix_abs[ci];
        double s_out = (prefix_abs.back() - prefix_abs[ci]) + std::sqrt(static_cast<double>(q)) * beyond.outer;
        double diag_out = (prefix_sq.back() - prefix_sq[ci]) + beyond.outer_sq;
        double bound = 4.0 * density * s_in * s_out + prim_count * diag_out;
        if (bound <= budget) return N;
    }
    throw std::out_of_range(
        "second_moment_direct: coefficient table too short for the requested tolerance "
        "(table length " + std::to_string(L) + ")");
}

// Collapse the AFE weights a(n) W_0(n/q)/sqrt(n) into residue classes mod q.
// Fixed chunk grid + in-order merge keeps the result identical for every
// thread count.
std::vector<double> residue_weights(const EigenformCoefficients& coeffs, const CharacterGroup& G,
                                    std::uint64_t N, const KernelTable& w, unsigned threads) {
    const std::uint64_t q = G.modulus();
    const std::uint64_t chunk = 1 << 18;
    const std::size_t nchunks = (N + chunk - 1) / chunk;
    std::vector<std::vector<NeumaierSum>> partial(nchunks);
    const double invq = 1.0 / static_cast<double>(q);
    parallel_chunks(nchunks, threads, [&](std::size_t ci) {
        std::vector<NeumaierSum> local(q);
        std::uint64_t n0 = ci * chunk + 1, n1 = std::min<std::uint64_t>(N, (ci + 1) * chunk);
        for (std::uint64_t n = n0; n <= n1; ++n) {
            std::uint64_t r = n % q;
            if (!G.is_unit(r)) continue;
            double x = static_cast<double>(n) * invq;
            local[r].add(coeffs.a[n] / std::sqrt(static_cast<double>(n)) * w(x).real());
        }
        partial[ci] = std::move(local);
    });
    std::vector<NeumaierSum> merged(q);
    for (std::size_t ci = 0; ci < nchunks; ++ci)
        for (std::uint64_t r = 0; r < q; ++r) merged[r].add(partial[ci][r]);
    std::vector<double> out(q);
    for (std::uint64_t r = 0; r < q; ++r) out[r] = merged[r].value();
    return out;
}

struct DirectSweep {
    double total = 0.0;
    std::uint64_t truncation_N = 0;
};

// sum over primitive chi of |S(chi) + i^k (tau^2/q) S(conj chi)|^2 where
// S(chi) = sum_r chi(r) omega(r); chi and conj(chi) paired.
DirectSweep direct_sweep(const EigenformCoefficients& coeffs, const CharacterGroup& G,
                         double tol, unsigned threads) {
    const std::uint64_t q = G.modulus();
    const Factorization& qf = G.factorization();
    const KernelTable& w = w0_table(coeffs.weight);

    DirectSweep out;
    if (primitive_character_count(qf) == 0) return out;

    std::uint64_t N = direct_truncation(coeffs, qf, tol, w);
    if (N > coeffs.length())
        throw std::out_of_range("second_moment_direct: coefficient table too short (need " +
                                std::to_string(N) + " terms)");
    out.truncation_N = N;

    std::vector<double> omega = residue_weights(coeffs, G, N, w, threads);

    const std::uint64_t phi = G.order();
    std::vector<DirichletCharacter> chars(phi);
    {
        const std::uint64_t cchunk = 64;
        std::size_t nchunks = (phi + cchunk - 1) / cchunk;
        parallel_chunks(nchunks, threads, [&](std::size_t ci) {
            std::uint64_t i0 = ci * cchunk, i1 = std::min<std::uint64_t>(phi, i0 + cchunk);
            for (std::uint64_t i = i0; i < i1; ++i) chars[i] = G.character(i);
        });
    }

    std::vector<std::complex<double>> S(phi);
    {
        const std::uint64_t cchunk = 16;
        std::size_t nchunks = (phi + cchunk - 1) / cchunk;
        parallel_chunks(nchunks, threads, [&](std::size_t ci) {
            std::uint64_t i0 = ci * cchunk, i1 = std::min<std::uint64_t>(phi, i0 + cchunk);
            for (std::uint64_t i = i0; i < i1; ++i) {
                if (!chars[i].is_primitive()) continue;
                NeumaierCSum acc;
                for (std::uint64_t r = 0; r < q; ++r) {
                    if (!G.is_unit(r) || omega[r] == 0.0) continue;
                    acc.add(chars[i](r) * omega[r]);
                }
                S[i] = acc.value();
            }
        });
    }

    NeumaierSum total;
    for (std::uint64_t i = 0; i < phi; ++i) {
        if (!chars[i].is_primitive()) continue;
        std::uint64_t j = chars[i].conjugate_index();
        if (j < i) continue;
        std::complex<double> L = S[i] + root_number(chars[i], coeffs.weight) * S[j];
        total.add((i == j ? 1.0 : 2.0) * std::norm(L));
    }
    out.total = total.value();
    return out;
}

}  // namespace

std::uint64_t moment_required_length(std::uint64_t q, double tol, int weight) {
    // A-priori sizing model with mean coefficient weights (|a| ~ 0.8,
    // a^2 ~ 0.4) in place of the per-table prefix sums direct_truncation
    // uses once coefficients exist.
    Factorization qf = factorize(q);
    const KernelTable& w = w0_table(weight);
    double budget = 0.5 * tol * 0.7 * static_cast<double>(q) * std::log(static_cast<double>(q));
    double density = 0.0;
    for (std::uint64_t d : divisors(qf)) {
        Factorization fd = factorize(d);
        if (mobius(fd) == 0) continue;
        density += static_cast<double>(euler_phi(factorize(q / d))) * static_cast<double>(d) /
                   static_cast<double>(q);
    }
    const double step = std::log(1.002);
    auto unit_integrals = [&](std::uint64_t N, double& inner, double& outer, double& outer_sq) {
        double x0 = static_cast<double>(N) / static_cast<double>(q);
        inner = outer = outer_sq = 0.0;
        for (double lx = std::log(w.x_min()); lx < std::log(w.x_max()); lx += step) {
            double u = std::exp(lx);
            double du = u * (std::exp(step) - 1.0);
            double env = w.tail_envelope(u);
            if (env <= 0.0) break;
            if (u < x0)
                inner += env / std::sqrt(u) * du;
            else {
                outer += env / std::sqrt(u) * du;
                outer_sq += env * env / u * du;
            }
        }
    };
    double prim = static_cast<double>(primitive_character_count(qf));
    std::uint64_t lo = q, hi = q;
    auto bound_at = [&](std::uint64_t N) {
        double in, out, out_sq;
        unit_integrals(N, in, out, out_sq);
        return 4.0 * density * 0.64 * static_cast<double>(q) * in * out + prim * 0.4 * out_sq;
    };
    while (bound_at(hi) > budget) {
        if (hi > (std::uint64_t(1) << 36)) return hi;
        hi *= 2;
    }
    while (lo + 1 < hi) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (bound_at(mid) <= budget)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double second_moment_direct(const EigenformCoefficients& coeffs, std::uint64_t q, double tol,
                            unsigned threads) {
    if (q < 3) throw std::invalid_argument("second_moment_direct: q must be >= 3");
    CharacterGroup G(q);
    return direct_sweep(coeffs, G, tol, threads).total;
}

DoubleSumParts second_moment_double_sum(const EigenformCoefficients& coeffs, std::uint64_t q,
                                        double tol, unsigned threads) {
    if (q < 3) throw std::invalid_argument("second_moment_double_sum: q must be >= 3");
    (void)tol;
    Factorization qf = factorize(q);
    CharacterGroup G(q);
    const KernelTable& v = v_table(coeffs.weight);

    const double support = v.support_limit(1e-14);
    const double q2 = static_cast<double>(q) * static_cast<double>(q);
    const double nm_cap = support * q2;
    const std::uint64_t n_cap =
        std::min<std::uint64_t>(coeffs.length(), static_cast<std::uint64_t>(nm_cap));

    const double threshold = std::pow(std::log(static_cast<double>(q)), 0.05);

    // log m lookup keeps the inner loop free of transcendental calls.
    std::vector<float> log_n(n_cap + 1, 0.0f);
    for (std::uint64_t n = 1; n <= n_cap; ++n)
        log_n[n] = static_cast<float>(std::log(static_cast<double>(n)));

    DoubleSumParts parts;
    NeumaierSum small_acc, large_acc;

    for (std::uint64_t d : divisors(qf)) {
        Factorization fd = factorize(d);
        std::int64_t mu = mobius(fd);
        bool small_side = static_cast<double>(d) < threshold;
        if (small_side) ++parts.small_divisor_count;
        if (mu == 0) continue;
        std::uint64_t ell = q / d;
        double weight = static_cast<double>(mu) *
                        static_cast<double>(euler_phi(factorize(ell)));

        // pairs n == m mod ell with nm below the kernel support
        const std::uint64_t chunk = std::max<std::uint64_t>(1024, n_cap / 512);
        std::size_t nchunks = (n_cap + chunk - 1) / chunk;
        std::vector<NeumaierSum> partial(nchunks);
        parallel_chunks(nchunks, threads, [&](std::size_t ci) {
            NeumaierSum acc;
            std::uint64_t n0 = ci * chunk + 1, n1 = std::min<std::uint64_t>(n_cap, (ci + 1) * chunk);
            for (std::uint64_t n = n0; n <= n1; ++n) {
                if (!G.is_unit(n % q)) continue;
                double limit = nm_cap / static_cast<double>(n);
                std::uint64_t m_max = std::min<std::uint64_t>(
                    n_cap, static_cast<std::uint64_t>(limit));
                std::uint64_t m = (n - 1) % ell + 1;
                double an = coeffs.a[n];
                double base = std::log(static_cast<double>(n)) - std::log(q2);
                for (; m <= m_max; m += ell) {
                    if (!G.is_unit(m % q)) continue;
                    double vv = v.real_at_log(base + static_cast<double>(log_n[m]));
                    if (vv == 0.0) continue;
                    acc.add(an * coeffs.a[m] /
                            std::sqrt(static_cast<double>(n) * static_cast<double>(m)) * vv);
                }
            }
            partial[ci] = acc;
        });
        NeumaierSum d_total;
        for (std::size_t ci = 0; ci < nchunks; ++ci) d_total.add(partial[ci]);
        double term = weight * d_total.value();
        if (small_side)
            small_acc.add(term);
        else
            large_acc.add(term);
    }

    parts.small_part = small_acc.value();
    parts.large_part = large_acc.value();
    parts.total = parts.small_part + parts.large_part;

    // diagonal inside the small-divisor part: same n-sum for every small d
    double diag_base = 0.0;
    {
        NeumaierSum acc;
        std::uint64_t n_diag = std::min<std::uint64_t>(
            n_cap, static_cast<std::uint64_t>(std::sqrt(nm_cap)) + 1);
        for (std::uint64_t n = 1; n <= n_diag; ++n) {
            if (!G.is_unit(n % q)) continue;
            double x = static_cast<double>(n) * static_cast<double>(n) / q2;
            acc.add(coeffs.a[n] * coeffs.a[n] / static_cast<double>(n) * v.real_at(x));
        }
        diag_base = acc.value();
    }
    double small_mu_phi = 0.0;
    for (std::uint64_t d : divisors(qf)) {
        if (static_cast<double>(d) >= threshold) continue;
        Factorization fd = factorize(d);
        small_mu_phi += static_cast<double>(mobius(fd)) *
                        static_cast<double>(euler_phi(factorize(q / d)));
    }
    parts.diagonal_part = small_mu_phi * diag_base;
    parts.off_diagonal_part = parts.small_part - parts.diagonal_part;

    // mass beyond the coefficient table (zero when the table covers the
    // whole kernel support)
    if (static_cast<double>(n_cap) < nm_cap) {
        double est = 0.0;
        const double step = std::log(1.002);
        for (std::uint64_t d : divisors(qf)) {
            Factorization fd = factorize(d);
            if (mobius(fd) == 0) continue;
            double phi_ell = static_cast<double>(euler_phi(factorize(q / d)));
            double ell = static_cast<double>(q / d);
            double lx = std::log(static_cast<double>(n_cap) / q2);
            double lmax = std::log(support);
            double integral = 0.0;
            while (lx < lmax) {
                double u = std::exp(lx);
                double du = u * (std::exp(step) - 1.0);
                double t = u * q2;
                double dln = std::log(std::max(t, 2.0)) + kTwoGamma;
                integral += dln * dln / std::sqrt(t) * v.tail_envelope(u) * (q2 * du) / ell;
                lx += step;
            }
            est += 2.0 * phi_ell * integral;
        }
        parts.neglected_mass = est;
    }
    return parts;
}

double diagonal_sum(const EigenformCoefficients& coeffs, std::uint64_t q, double tol,
                    double* leading_out) {
    if (q < 3) throw std::invalid_argument("diagonal_sum: q must be >= 3");
    (void)tol;
    Factorization qf = factorize(q);
    CharacterGroup G(q);
    const KernelTable& v = v_table(coeffs.weight);
    const double q2 = static_cast<double>(q) * static_cast<double>(q);
    double support = v.support_limit(1e-14);
    std::uint64_t n_max = std::min<std::uint64_t>(
        coeffs.length(), static_cast<std::uint64_t>(std::sqrt(support * q2)) + 1);
    NeumaierSum acc;
    for (std::uint64_t n = 1; n <= n_max; ++n) {
        if (!G.is_unit(n % q)) continue;
        acc.add(coeffs.a[n] * coeffs.a[n] / static_cast<double>(n) *
                v.real_at(static_cast<double>(n) * static_cast<double>(n) / q2));
    }
    if (leading_out) {
        double k_est = estimate_K_extrapolated(coeffs,
                                               std::min<std::uint64_t>(coeffs.length(), 400000));
        *leading_out = k_est * euler_product_P(qf, 1.0, coeffs).at_s.real() *
                       std::log(static_cast<double>(q));
    }
    return acc.value();
}

double main_term(const EigenformCoefficients& coeffs, std::uint64_t q,
                 std::optional<double> K_override) {
    if (q < 3) throw std::invalid_argument("main_term: q must be >= 3");
    Factorization qf = factorize(q);
    double K = K_override ? *K_override
                          : estimate_K_extrapolated(
                                coeffs, std::min<std::uint64_t>(coeffs.length(), 400000));
    double p1 = euler_product_P(qf, 1.0, coeffs).at_s.real();
    return K * p1 * psi(qf).to_double() * static_cast<double>(q) *
           std::log(static_cast<double>(q));
}

MomentReport moment_report(const EigenformCoefficients& coeffs, std::uint64_t q, double tol,
                           unsigned threads, std::optional<double> K_override) {
    if (q < 3) throw std::invalid_argument("moment_report: q must be >= 3");
    MomentReport rep;
    rep.q = q;
    rep.tol = tol;
    rep.table_length = coeffs.length();

    Factorization qf = factorize(q);
    CharacterGroup G(q);

    auto t0 = std::chrono::steady_clock::now();
    DirectSweep direct = direct_sweep(coeffs, G, tol, threads);
    rep.direct = direct.total;
    rep.truncation_N = direct.truncation_N;
    rep.runtime_seconds["direct"] = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    DoubleSumParts parts = second_moment_double_sum(coeffs, q, tol, threads);
    rep.double_sum = parts.total;
    rep.small_divisor_part = parts.small_part;
    rep.large_divisor_part = parts.large_part;
    rep.diagonal_part = parts.diagonal_part;
    rep.off_diagonal_part = parts.off_diagonal_part;
    rep.neglected_mass = parts.neglected_mass;
    rep.small_divisor_count = parts.small_divisor_count;
    rep.runtime_seconds["double_sum"] = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    rep.K_used = estimate_K_extrapolated(coeffs,
                                         std::min<std::uint64_t>(coeffs.length(), 400000));
    rep.main_term = main_term(coeffs, q, rep.K_used);
    rep.ratio = rep.direct / rep.main_term;
    if (K_override)
        rep.ratio_with_K_override = rep.direct / main_term(coeffs, q, *K_override);
    double diag_leading = 0.0;
    diagonal_sum(coeffs, q, tol, &diag_leading);
    rep.diagonal_leading = diag_leading;
    rep.runtime_seconds["main_term"] = seconds_since(t0);

    if (q >= 17) {
        ConditionReport cr = check_assumption(qf);
        rep.condition_x = cr.x_threshold;
        rep.condition_lhs = cr.lhs;
        rep.condition_rhs = cr.rhs;
        rep.condition_holds = cr.holds;
    } else {
        rep.condition_x = rep.condition_lhs = rep.condition_rhs =
            std::numeric_limits<double>::quiet_NaN();
        rep.condition_holds = false;
    }
    rep.divisor_condition_sum = htm::divisor_condition_sum(qf);
    return rep;
}

double full_group_second_moment(const EigenformCoefficients& coeffs, std::uint64_t q, double tol,
                                unsigned threads) {
    if (q < 3) throw std::invalid_argument("full_group_second_moment: q must be >= 3");
    Factorization qf = factorize(q);
    const KernelTable& w = w0_table(coeffs.weight);
    std::vector<std::uint64_t> qdivs = divisors(qf);

    NeumaierSum total;
    for (std::uint64_t d : qdivs) {
        Factorization fd = factorize(d);
        if (primitive_character_count(fd) == 0) continue;
        CharacterGroup Gd(d);

        std::uint64_t N = afe_required_length(d, 0.0, tol, coeffs.weight);
        if (N > coeffs.length())
            throw std::out_of_range("full_group_second_moment: coefficient table too short");
        std::vector<double> omega = residue_weights(coeffs, Gd, N, w, threads);

        // primes of q not dividing d
        std::vector<std::uint64_t> extra;
        for (const auto& [p, e] : qf.factors) {
            (void)e;
            if (d % p != 0) extra.push_back(p);
        }

        for (std::uint64_t i = 0; i < Gd.order(); ++i) {
            DirichletCharacter chi = Gd.character(i);
            if (!chi.is_primitive()) continue;
            NeumaierCSum acc;
            for (std::uint64_t r = 0; r < d; ++r) {
                if (!Gd.is_unit(r) || omega[r] == 0.0) continue;
                acc.add(chi(r) * omega[r]);
            }
            std::complex<double> S = acc.value();
            NeumaierCSum acc2;
            for (std::uint64_t r = 0; r < d; ++r) {
                if (!Gd.is_unit(r) || omega[r] == 0.0) continue;
                acc2.add(std::conj(chi(r)) * omega[r]);
            }
            std::complex<double> L = S + root_number(chi, coeffs.weight) * acc2.value();
            std::complex<double> factor = 1.0;
            for (std::uint64_t p : extra) factor *= euler_local_factor(coeffs, chi, p, 0.0);
            total.add(std::norm(L * factor));
        }
    }
    return total.value();
}

}  // namespace htm
