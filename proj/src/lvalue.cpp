#include "htm/lvalue.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "htm/parallel.hpp"

namespace htm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kTwoGamma = 1.1544313298030657;  // 2 * Euler-Mascheroni

// Shared W_s tables keyed by (weight, s); s takes only a handful of values
// per run, so the cache stays tiny.
const KernelTable& w_table(int weight, std::complex<double> s) {
    if (s == std::complex<double>(0.0, 0.0)) return w0_table(weight);
    static std::mutex mu;
    static std::map<std::tuple<int, double, double>, std::unique_ptr<KernelTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(weight, s.real(), s.imag());
    auto& slot = cache[key];
    if (!slot) slot = std::make_unique<KernelTable>(KernelKind::W, weight, s, 1e-9, 5e4);
    return *slot;
}

}  // namespace

double afe_tail_estimate(const KernelTable& table, std::uint64_t q, std::uint64_t N) {
    // sum_{n>N} (log n + 2 gamma) n^{-1/2} |W|(n/q), via the knot envelope;
    // the log+2gamma factor is the divisor-function average, valid for the
    // smoothed sums this bounds.
    const double ratio_step = std::log(1.002);
    double x0 = static_cast<double>(N + 1) / static_cast<double>(q);
    if (x0 < table.x_min()) x0 = table.x_min();
    double lx = std::log(x0);
    double lmax = std::log(table.x_max());
    double total = 0.0;
    while (lx < lmax) {
        double u = std::exp(lx);
        double du = u * (std::exp(ratio_step) - 1.0);
        double n_here = u * static_cast<double>(q);
        double env = table.tail_envelope(u);
        if (env <= 0.0) break;
        total += (std::log(std::max(n_here, 2.0)) + kTwoGamma) / std::sqrt(n_here) * env *
                 static_cast<double>(q) * du;
        lx += ratio_step;
    }
    return total;
}

std::uint64_t afe_required_length(std::uint64_t q, std::complex<double> s, double tol, int weight) {
    const KernelTable& tp = w_table(weight, s);
    const KernelTable& tm = w_table(weight, -s);
    auto tail_ok = [&](std::uint64_t N) {
        return afe_tail_estimate(tp, q, N) <= 0.5 * tol && afe_tail_estimate(tm, q, N) <= 0.5 * tol;
    };
    std::uint64_t lo = q;  // the sums are never shorter than ~q
    if (tail_ok(lo)) {
        lo = 8;
        if (tail_ok(lo)) return lo;
    }
    std::uint64_t hi = lo;
    while (!tail_ok(hi)) {
        if (hi > (std::uint64_t(1) << 40))
            throw std::runtime_error("afe_required_length: tolerance unreachable within kernel range");
        hi *= 2;
    }
    lo = hi / 2;
    while (lo + 1 < hi) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (tail_ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

LValueResult l_value_afe(const EigenformCoefficients& coeffs, const DirichletCharacter& chi,
                         std::complex<double> s, double tol) {
    if (!chi.is_primitive())
        throw std::invalid_argument("l_value_afe: character must be primitive");
    if (std::abs(s.real()) > 1e-9)
        throw std::domain_error("l_value_afe: requires Re(s) = 0");
    if (!(tol > 0.0)) throw std::invalid_argument("l_value_afe: tol must be positive");
    s = {0.0, s.imag()};

    const std::uint64_t q = chi.modulus();
    const int k = coeffs.weight;
    const KernelTable& wp = w_table(k, s);
    const KernelTable& wm = w_table(k, -s);

    std::uint64_t N = afe_required_length(q, s, tol, k);
    if (N > coeffs.length())
        throw std::out_of_range("l_value_afe: coefficient table too short (need " +
                                std::to_string(N) + " terms)");

    const double half_k = k / 2.0;
    // i^k tau(chi)^2/q * (2pi/q)^{2s} Gamma(k/2-s)/Gamma(k/2+s); unimodular
    // on the critical line.
    std::complex<double> eta =
        root_number(chi, k) *
        std::exp(2.0 * s * (kLog2Pi - std::log(static_cast<double>(q))) +
                 log_gamma(half_k - s) - log_gamma(half_k + s));

    NeumaierCSum sum_plus, sum_minus;
    const bool central = (s == std::complex<double>(0.0, 0.0));
    const double invq = 1.0 / static_cast<double>(q);
    for (std::uint64_t n = 1; n <= N; ++n) {
        std::complex<double> chin = chi(n);
        if (chin == std::complex<double>(0.0, 0.0)) continue;
        double x = static_cast<double>(n) * invq;
        if (central) {
            double w = coeffs.a[n] / std::sqrt(static_cast<double>(n)) * wp(x).real();
            sum_plus.add(w * chin);
            sum_minus.add(w * std::conj(chin));
        } else {
            double ln_n = std::log(static_cast<double>(n));
            std::complex<double> np = std::exp(-(0.5 + s) * ln_n);
            std::complex<double> nm = std::exp(-(0.5 - s) * ln_n);
            sum_plus.add(coeffs.a[n] * chin * np * wp(x));
            sum_minus.add(coeffs.a[n] * std::conj(chin) * nm * wm(x));
        }
    }

    LValueResult out;
    out.s = s;
    out.q = q;
    out.truncation_N = N;
    out.value = sum_plus.value() + eta * sum_minus.value();
    out.tail_bound = afe_tail_estimate(wp, q, N) + std::abs(eta) * afe_tail_estimate(wm, q, N);
    out.epsilon_trunc = q > 1 ? std::log(static_cast<double>(N)) / std::log(static_cast<double>(q)) - 1.0
                              : 0.0;
    out.contour_c = 1.0;
    out.contour_T = 10.0;
    out.contour_h = 0.02;
    return out;
}

double fe_residual(const EigenformCoefficients& coeffs, const DirichletCharacter& chi,
                   std::complex<double> s, double tol) {
    if (!chi.is_primitive())
        throw std::invalid_argument("fe_residual: character must be primitive");
    const std::uint64_t q = chi.modulus();
    const double half_k = coeffs.weight / 2.0;
    const double log_q_2pi = std::log(static_cast<double>(q)) - kLog2Pi;

    LValueResult l1 = l_value_afe(coeffs, chi, s, tol);
    LValueResult l2 = l_value_afe(coeffs, chi.conjugate(), -s, tol);

    std::complex<double> pre_l = std::exp(s * log_q_2pi + log_gamma(half_k + s));
    std::complex<double> pre_r = std::exp(-s * log_q_2pi + log_gamma(half_k - s));
    std::complex<double> lhs = pre_l * l1.value;
    std::complex<double> rhs = root_number(chi, coeffs.weight) * pre_r * l2.value;
    // The denominator floor (tol in the units of the completed L-function)
    // keeps the metric meaningful at forced central zeros, where both sides
    // vanish identically and |LHS| + |RHS| alone would compare rounding
    // noise against itself.
    double floor = tol * (std::abs(pre_l) + std::abs(pre_r));
    return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + floor);
}

std::complex<double> euler_local_factor(const EigenformCoefficients& coeffs,
                                        const DirichletCharacter& chi,
                                        std::uint64_t p, std::complex<double> s) {
    if (p > coeffs.length())
        throw std::out_of_range("euler_local_factor: prime beyond coefficient table");
    std::complex<double> chip = chi(p);
    if (chip == std::complex<double>(0.0, 0.0)) return {1.0, 0.0};
    double lp = std::log(static_cast<double>(p));
    std::complex<double> t1 = std::exp(-(s + 0.5) * lp);
    std::complex<double> t2 = std::exp(-(2.0 * s + 1.0) * lp);
    return 1.0 - coeffs.a[p] * chip * t1 + chip * chip * t2;
}

std::complex<double> l_series_partial(const EigenformCoefficients& coeffs,
                                      const DirichletCharacter& chi,
                                      std::complex<double> s, std::uint64_t N) {
    if (s.real() < 1.5)
        throw std::domain_error("l_series_partial: requires Re(s) >= 1.5 (absolute convergence)");
    if (N > coeffs.length())
        throw std::out_of_range("l_series_partial: N exceeds coefficient table");
    NeumaierCSum sum;
    for (std::uint64_t n = 1; n <= N; ++n) {
        std::complex<double> chin = chi(n);
        if (chin == std::complex<double>(0.0, 0.0)) continue;
        sum.add(coeffs.a[n] * chin * std::exp(-s * std::log(static_cast<double>(n))));
    }
    return sum.value();
}

}  // namespace htm
