#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace htm {

// Principal-branch log Gamma via the Lanczos approximation (g = 7, 9 terms)
// with reflection for Re z < 1/2.  Relative error <= ~1e-13 for |z| <= 100.
std::complex<double> log_gamma(std::complex<double> z);
std::complex<double> complex_gamma(std::complex<double> z);

// Gamma quotient driving the |L|^2 Mellin kernel:
//   G(s) = Gamma(k/2+s)^2 / ((2 pi)^(2s) Gamma(k/2)^2),  G(0) = 1.
std::complex<double> gamma_quotient_G(std::complex<double> s, int weight);

// Contour parameters for the vertical-line quadrature.  c <= 0 is allowed
// for oracle evaluations that shift across y = 0 (the caller adds the
// residue).  When c is not set, a per-x policy picks an abscissa that keeps
// the x^-c prefactor from amplifying roundoff.
struct KernelParams {
    std::optional<double> c;      // contour abscissa
    std::optional<double> T;      // truncation height (auto if unset)
    double h = 0.0;               // step; 0 = kind default (V: 0.05, W: 0.02)
};

// V(x) = (1/(pi i)) int_(c) G(y) x^-y dy/y.  Tends to 2 as x -> 0 (the
// 1/(pi i) prefactor is twice the usual Mellin normalization) and decays
// like exp(-4 pi sqrt x).  Throws if x <= 0 or if the quadrature's
// imaginary part exceeds 1e-10.
double kernel_v(double x, int weight, const KernelParams& params = {});

// W_s(x) = (1/(2 pi i)) int_(c) Gamma(k/2+s+y)/Gamma(k/2+s) e^{y^2}
//          (2 pi x)^-y dy/y.  Tends to 1 as x -> 0; the e^{y^2} factor
// limits the large-x decay to exp(-(log 2 pi x)^2 / 4)-type.
std::complex<double> kernel_w(std::complex<double> s, double x, int weight,
                              const KernelParams& params = {});

enum class KernelKind { V, W };

// Memoized kernel evaluator: values on a geometric grid (knot ratio 1.002)
// with 4-point Lagrange interpolation in log x.  Grid construction reuses
// one quadrature profile per contour segment, so building ~15k knots costs
// a few milliseconds.  Immutable after construction.
class KernelTable {
  public:
    KernelTable(KernelKind kind, int weight, std::complex<double> shift = 0.0,
                double x_min = 1e-9, double x_max = 5e4);

    KernelKind kind() const { return kind_; }
    int weight() const { return weight_; }
    std::complex<double> shift() const { return shift_; }

    std::complex<double> operator()(double x) const;
    std::complex<double> at_log(double log_x) const;  // same, log-coordinate argument
    double real_at(double x) const { return (*this)(x).real(); }
    double real_at_log(double log_x) const { return at_log(log_x).real(); }

    // Largest knot with |value| > threshold (support cutoff for sums).
    double support_limit(double threshold) const;
    // max |value| over knots >= x (monotone envelope for tail bounds).
    double tail_envelope(double x) const;

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }

  private:
    KernelKind kind_;
    int weight_;
    std::complex<double> shift_;
    double x_min_, x_max_;
    double log_x_min_, inv_step_;
    std::vector<std::complex<double>> values_;
    std::vector<double> envelope_;  // suffix max of |values_|
};

// Shared W_0 / V tables per weight (built once, then read-only).
const KernelTable& v_table(int weight);
const KernelTable& w0_table(int weight);

}  // namespace htm
