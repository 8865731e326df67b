// SPDX-License-Identifier: Apache-2.0

#ifndef SPECLAB_WIENER_HPP
#define SPECLAB_WIENER_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace speclab {

using WMatrix = Eigen::MatrixXcd;

/// Operator-valued convolution kernel on the cyclic time group Z_m with
/// slot spacing tau: m matrix blocks L(t_k), plus an optional identity
/// carried symbolically (kernels of the form I + L never discretize the
/// identity into a slot). The mass norm is sum_k ||L(t_k)||_op * tau.
/// Causality statements treat the first m/2 slots as t >= 0 and the rest
/// as a guard band emulating the line.
struct TimeKernel {
    int m = 0;
    double tau = 1.0;
    int d = 1;
    bool has_identity = false;
    std::vector<WMatrix> blocks;

    static TimeKernel zero(int m, double tau, int d);
    static TimeKernel identity(int m, double tau, int d);

    double mass_norm() const;
    TimeKernel adjoint() const; // blocks L(-t)^*, slot k -> (m - k) mod m
};

/// Fourier transform samples A(lambda_j) at lambda_j = 2 pi j / (m tau).
struct SymbolFamily {
    double tau = 1.0;
    std::vector<double> lambdas;
    std::vector<WMatrix> values;
};

/// Cyclic convolution of blocks scaled by tau; identity parts compose
/// symbolically: (I + A)(I + B) = I + A + B + A*B.
TimeKernel convolve(const TimeKernel& a, const TimeKernel& b);

/// A(lambda_j) = [I +] sum_k e^{-i tau k lambda_j} L(t_k) tau.
SymbolFamily symbol(const TimeKernel& a);

/// Inversion by pointwise symbol inversion and inverse transform. Requires
/// the identity part (a = I + L) and every symbol invertible with condition
/// number below cond_limit; a singular symbol names the offending frequency
/// index (the finite analogue of an exceptional point).
TimeKernel invert(const TimeKernel& a, double cond_limit = 1e10);

/// Inversion through localized pieces glued by a smooth partition of unity
/// on the frequency circle: each piece blends the symbol toward the
/// identity off its arc through bump-profile cutoffs and is inverted
/// separately. Agrees with invert() wherever the cover is fine enough;
/// a non-invertible piece raises an error suggesting a finer cover.
TimeKernel invert_by_localization(const TimeKernel& a, int cover_count);

struct CausalityReport {
    bool is_causal = false;       // blocks vanish outside the window
    bool inverse_causal = false;  // same test on invert(a), guard tolerance
    double guard_mass = 0;        // inverse mass in the guard band
    double symbol_lower_min = 0;  // min sigma_min of the symbol, Im in [-2, 0]
    bool has_offender = false;
    std::complex<double> offending_lambda{0, 0};
};

/// Causality criterion on the guarded cyclic model: a causal kernel with a
/// symbol that stays invertible on the sampled lower half-plane has a
/// causal inverse; a lower-half-plane symbol zero is reported with the
/// offending lambda and makes inverse_causal false.
CausalityReport causality_check(const TimeKernel& a, int window = -1);

} // namespace speclab

#endif
