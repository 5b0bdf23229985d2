#include "htm/special_functions.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace htm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

// Lanczos, g = 7, 9 terms.
constexpr double kLanczos[9] = {
    0.99999999999980993,    676.5203681218851,    -1259.1392167224028,
    771.32342877765313,     -176.61502916214059,  12.507343278686905,
    -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7};

std::complex<double> log_gamma_positive(std::complex<double> z) {
    // valid for Re(z) >= 0.5
    z -= 1.0;
    std::complex<double> x = kLanczos[0];
    for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + static_cast<double>(i));
    std::complex<double> t = z + 7.5;
    return 0.5 * kLog2Pi + (z + 0.5) * std::log(t) - t + std::log(x);
}

}  // namespace

std::complex<double> log_gamma(std::complex<double> z) {
    if (z.real() >= 0.5) return log_gamma_positive(z);
    // Reflection; arguments here stay at moderate |Im| in this codebase.
    std::complex<double> s = std::sin(kPi * z);
    if (s == std::complex<double>(0.0, 0.0))
        throw std::domain_error("log_gamma: pole at nonpositive integer");
    return std::log(kPi) - std::log(s) - log_gamma_positive(1.0 - z);
}

std::complex<double> complex_gamma(std::complex<double> z) { return std::exp(log_gamma(z)); }

std::complex<double> gamma_quotient_G(std::complex<double> s, int weight) {
    double half_k = weight / 2.0;
    return std::exp(2.0 * (log_gamma(half_k + s) - log_gamma(half_k)) - 2.0 * s * kLog2Pi);
}

// ---------------------------------------------------------------------------
// Vertical-line quadrature.
//
// Both kernels are integrals (prefactor) int_(c) F(y) x^-y dy / y evaluated
// by the trapezoid rule on y = c + i t; the integrands decay fast enough in
// |t| (Gamma decay for V, the e^{y^2} Gaussian for W) that a uniform step is
// spectrally accurate.  The x dependence enters only through exp(-y L) with
// a real L, so one t-profile serves every x on the contour: evaluation is a
// single sweep with the unimodular step factor exp(-i h L).

namespace {

struct ContourProfile {
    double c = 0.0, h = 0.0, T = 0.0;
    // node j in [-M, M] carries weight[(j+M)] = pref * h * F(c + i j h) / y_j
    std::vector<std::complex<double>> weight;
    int M = 0;

    // sum_j weight_j * exp(-y_j * L)
    std::complex<double> eval(double L) const {
        std::complex<double> step = std::exp(std::complex<double>(0.0, -h * L));
        std::complex<double> rot = std::exp(std::complex<double>(0.0, static_cast<double>(M) * h * L));
        // rot = exp(-i t_j L) at j = -M; multiply by step each node.
        double scale = std::exp(-c * L);
        std::complex<double> acc = 0.0;
        for (int j = 0; j < 2 * M + 1; ++j) {
            acc += weight[j] * rot;
            rot *= step;
        }
        return scale * acc;
    }
};

// F(y) = G(y) e^{2 y log 2pi} = Gamma(k/2+y)^2 / Gamma(k/2)^2 for V (the
// (2pi)^{-2y} factor is folded into L = log x + 2 log 2pi), and
// Gamma(k/2+s+y)/Gamma(k/2+s) e^{y^2} for W (L = log 2pi x).
ContourProfile build_profile(KernelKind kind, int weight, std::complex<double> shift, double c,
                             double h, std::optional<double> T_opt) {
    ContourProfile p;
    p.c = c;
    p.h = h;
    double half_k = weight / 2.0;
    double pref = (kind == KernelKind::V) ? h / kPi : h / (2.0 * kPi);
    std::complex<double> lg_base = (kind == KernelKind::V) ? log_gamma(half_k)
                                                           : log_gamma(half_k + shift);
    auto node = [&](double t) -> std::complex<double> {
        std::complex<double> y(c, t);
        std::complex<double> lg;
        if (kind == KernelKind::V)
            lg = 2.0 * (log_gamma(half_k + y) - lg_base);
        else
            lg = log_gamma(half_k + shift + y) - lg_base + y * y;
        return pref * std::exp(lg) / y;
    };

    int M;
    if (T_opt) {
        M = static_cast<int>(std::ceil(*T_opt / h));
    } else {
        // Extend until the integrand is dead (8 consecutive nodes below
        // 1e-19 of the peak), hard cap |t| <= 120.
        double peak = std::abs(node(0.0));
        int dead = 0;
        int j = 1;
        int cap = static_cast<int>(120.0 / h);
        for (; j < cap; ++j) {
            double a = std::abs(node(j * h));
            peak = std::max(peak, a);
            if (a < 1e-19 * std::max(peak, 1e-30)) {
                if (++dead >= 8) break;
            } else {
                dead = 0;
            }
        }
        M = j;
    }
    p.M = M;
    p.T = M * h;
    p.weight.resize(2 * M + 1);
    for (int j = -M; j <= M; ++j) p.weight[j + M] = node(j * h);
    return p;
}

double default_step(KernelKind kind) { return kind == KernelKind::V ? 0.05 : 0.02; }

// Abscissa policy when the caller does not pin one: small x needs a small c
// so the x^-c prefactor cannot amplify roundoff; for V, large x wants a
// contour near the decay saddle.
double auto_abscissa(KernelKind kind, double x) {
    if (x < 0.5) return 0.5;
    if (kind == KernelKind::V) return x < 5.0 ? 2.0 : 8.0;
    return 1.0;
}

std::complex<double> kernel_eval(KernelKind kind, std::complex<double> shift, double x, int weight,
                                 const KernelParams& params) {
    if (!(x > 0.0)) throw std::domain_error("kernel: x must be positive");
    double c = params.c ? *params.c : auto_abscissa(kind, x);
    double h = params.h > 0.0 ? params.h : default_step(kind);
    ContourProfile prof = build_profile(kind, weight, shift, c, h, params.T);
    double L = (kind == KernelKind::V) ? std::log(x) + 2.0 * kLog2Pi
                                       : std::log(2.0 * kPi * x);
    return prof.eval(L);
}

}  // namespace

double kernel_v(double x, int weight, const KernelParams& params) {
    std::complex<double> v = kernel_eval(KernelKind::V, 0.0, x, weight, params);
    if (std::abs(v.imag()) > 1e-10)
        throw std::runtime_error("kernel_v: quadrature imaginary part exceeds tolerance");
    return v.real();
}

std::complex<double> kernel_w(std::complex<double> s, double x, int weight,
                              const KernelParams& params) {
    return kernel_eval(KernelKind::W, s, x, weight, params);
}

// ---------------------------------------------------------------------------
// KernelTable

KernelTable::KernelTable(KernelKind kind, int weight, std::complex<double> shift, double x_min,
                         double x_max)
    : kind_(kind), weight_(weight), shift_(shift), x_min_(x_min), x_max_(x_max) {
    const double ratio = 1.002;
    const double step = std::log(ratio);
    log_x_min_ = std::log(x_min);
    inv_step_ = 1.0 / step;
    std::size_t n_knots = static_cast<std::size_t>(std::ceil((std::log(x_max) - log_x_min_) * inv_step_)) + 4;
    values_.resize(n_knots);

    // One quadrature profile per abscissa segment; evaluation per knot is a
    // profile sweep.
    double segment_edges[2] = {0.5, 5.0};
    int n_edges = (kind == KernelKind::V) ? 2 : 1;
    std::size_t i = 0;
    while (i < n_knots) {
        double x0 = std::exp(log_x_min_ + i / inv_step_);
        double c = auto_abscissa(kind, x0);
        // knots sharing this abscissa
        std::size_t j = i;
        while (j < n_knots) {
            double xj = std::exp(log_x_min_ + j / inv_step_);
            bool crossed = false;
            for (int e = 0; e < n_edges; ++e)
                if (x0 < segment_edges[e] && xj >= segment_edges[e]) crossed = true;
            if (crossed) break;
            ++j;
        }
        ContourProfile prof = build_profile(kind, weight, shift, c, default_step(kind), {});
        for (std::size_t k = i; k < j; ++k) {
            double xk = std::exp(log_x_min_ + k / inv_step_);
            double L = (kind == KernelKind::V) ? std::log(xk) + 2.0 * kLog2Pi
                                               : std::log(2.0 * kPi * xk);
            values_[k] = prof.eval(L);
        }
        i = j;
    }

    envelope_.resize(n_knots);
    double running = 0.0;
    for (std::size_t k = n_knots; k-- > 0;) {
        running = std::max(running, std::abs(values_[k]));
        envelope_[k] = running;
    }
}

std::complex<double> KernelTable::operator()(double x) const {
    if (!(x > 0.0)) throw std::domain_error("KernelTable: x must be positive");
    return at_log(std::log(x));
}

std::complex<double> KernelTable::at_log(double log_x) const {
    if (log_x <= log_x_min_) return values_.front();  // kernels are flat as x -> 0
    double u = (log_x - log_x_min_) * inv_step_;
    std::int64_t i = static_cast<std::int64_t>(u);
    if (i + 3 >= static_cast<std::int64_t>(values_.size()))
        return {0.0, 0.0};  // beyond the table the kernel is below 1e-14
    if (i < 2) i = 2;
    double f = u - static_cast<double>(i);
    // 6-point Lagrange on the uniform log grid, nodes at f = -2..3; the
    // extra order keeps the relative error at 1e-9 even where the kernels
    // fall like exp(-4 pi sqrt x).
    double fp2 = f + 2.0, fp1 = f + 1.0, fm1 = f - 1.0, fm2 = f - 2.0, fm3 = f - 3.0;
    double w0 = -fp1 * f * fm1 * fm2 * fm3 / 120.0;
    double w1 = fp2 * f * fm1 * fm2 * fm3 / 24.0;
    double w2 = -fp2 * fp1 * fm1 * fm2 * fm3 / 12.0;
    double w3 = fp2 * fp1 * f * fm2 * fm3 / 12.0;
    double w4 = -fp2 * fp1 * f * fm1 * fm3 / 24.0;
    double w5 = fp2 * fp1 * f * fm1 * fm2 / 120.0;
    return w0 * values_[i - 2] + w1 * values_[i - 1] + w2 * values_[i] + w3 * values_[i + 1] +
           w4 * values_[i + 2] + w5 * values_[i + 3];
}

double KernelTable::support_limit(double threshold) const {
    for (std::size_t k = envelope_.size(); k-- > 0;)
        if (envelope_[k] > threshold)
            return std::exp(log_x_min_ + (k + 1) / inv_step_);
    return x_min_;
}

double KernelTable::tail_envelope(double x) const {
    if (x <= x_min_) return envelope_.front();
    double u = (std::log(x) - log_x_min_) * inv_step_;
    std::size_t i = static_cast<std::size_t>(std::max(0.0, u));
    if (i >= envelope_.size()) return 0.0;
    return envelope_[i];
}

const KernelTable& v_table(int weight) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<KernelTable>> tables;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = tables[weight];
    if (!slot) slot = std::make_unique<KernelTable>(KernelKind::V, weight, 0.0, 1e-9, 1e3);
    return *slot;
}

const KernelTable& w0_table(int weight) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<KernelTable>> tables;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = tables[weight];
    if (!slot) slot = std::make_unique<KernelTable>(KernelKind::W, weight, 0.0, 1e-9, 5e4);
    return *slot;
}

}  // namespace htm
