// SPDX-License-Identifier: Apache-2.0

#ifndef SPECLAB_RESOLVENT_HPP
#define SPECLAB_RESOLVENT_HPP

#include <array>

#include "speclab/grid.hpp"
#include "speclab/hamiltonian.hpp"

namespace speclab {

enum class Branch {
    minus_i0, // boundary value from the lower half-plane (forward evolution)
    plus_i0   // boundary value from the upper half-plane
};

/// Spectral point for free-resolvent evaluation. Off-axis queries are
/// unambiguous; on the continuous spectrum the branch selects the one-sided
/// limit. eta > 0 asks for the regularized value at lambda -+ i eta instead
/// of the exact limit (used to cross-check the limits by extrapolation).
struct ResolventQuery {
    complexd lambda;
    Branch branch = Branch::minus_i0;
    double eta = 0.0;

    static ResolventQuery at(complexd lambda, Branch b = Branch::minus_i0)
    {
        return {lambda, b, 0.0};
    }
};

/// Square root of u with nonnegative imaginary part, so e^{i z r} decays off
/// the cut; for real u >= 0 the branch picks z = -sqrt(u) (minus_i0) or
/// +sqrt(u) (plus_i0).
complexd osc_root(complexd u, Branch b);

/// Square root of u with nonnegative real part, so e^{-w r} decays off the
/// cut; for real u <= 0 the branch picks w = -i sqrt(-u) (minus_i0) or
/// +i sqrt(-u) (plus_i0).
complexd dec_root(complexd u, Branch b);

/// Singular-cell constants for the 1/(4 pi r) kernel on a cubic cell of
/// side h: the plain cell average and the lattice-corrected weight that
/// cancels the O(h^2) defect of the punctured midpoint rule.
inline constexpr double kCellAverageUnit = 2.380077;       // avg of 1/|u| over unit cube
inline constexpr double kLatticeCorrectionUnit = 2.837297; // sum-vs-integral defect

/// Kernel of (H0 - lambda)^(-1) at displacement r != 0, as a (component-
/// diagonal) 1x1 or 2x2 matrix packed row-major into 4 entries.
/// Scalar: e^{i z |r|}/(4 pi |r|) with z = osc_root(lambda).
/// Matrix: diag(-e^{-w |r|}/(4 pi |r|), e^{i z |r|}/(4 pi |r|)) with
/// w = -osc_root(lambda + mu) and z = osc_root(lambda - mu).
std::array<complexd, 4> free_resolvent_kernel(const std::array<double, 3>& r,
                                              const ResolventQuery& q,
                                              const HamiltonianSpec& h);

/// Diagonal (r = 0) kernel weight for quadrature on spacing h: the
/// lattice-corrected 1/(4 pi r) weight plus the cell average of the smooth
/// remainder (e^{i z r} - 1)/(4 pi r).
complexd singular_cell_weight(complexd z, double h);
complexd singular_cell_weight_gap(complexd w, double h); // for -e^{-w r}/(4 pi r)

/// Quadrature convolution with the free-resolvent kernel: kernel sampled on
/// the grid at minimum-image displacements, zeroed beyond |r| = L/2, with
/// the singular-cell diagonal; applied by FFT.
GridFunction apply_free_resolvent(const GridFunction& f, const ResolventQuery& q,
                                  const HamiltonianSpec& h);

struct FourierLimitResult {
    GridFunction lhs;        // trapezoid of int_0^rho e^{-i t lambda} e^{i t H0} f dt
    GridFunction rhs;        // i R0(lambda - i0) f by kernel convolution
    double discrepancy = 0;  // ||lhs - rhs||_{6,inf}
    bool flagged = false;    // boundary mass at t = rho exceeded the tolerance
    // Two-sided variant for real lambda: int_{-rho}^{rho} vs the branch jump.
    bool has_two_sided = false;
    double two_sided_discrepancy = 0;
};

/// Verifies that the time integral of the phase-twisted free evolution
/// reproduces i R0(lambda - i0) f: the left side comes from trapezoid time
/// quadrature with step dt, the right side from kernel convolution.
/// For real lambda the symmetrized integral is also compared against
/// i (R0(lambda-i0) - R0(lambda+i0)) f.
FourierLimitResult fourier_limit_check(const GridFunction& f, complexd lambda, double rho,
                                       const HamiltonianSpec& h, double dt = 1e-3,
                                       double boundary_tol = 1e-3);

} // namespace speclab

#endif
