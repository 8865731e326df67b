// SPDX-License-Identifier: Apache-2.0

#ifndef SPECLAB_LORENTZ_HPP
#define SPECLAB_LORENTZ_HPP

#include <cstddef>
#include <vector>

#include "speclab/grid.hpp"

namespace speclab {

/// Decreasing rearrangement of a grid function as an exact step function:
/// strictly decreasing heights with the measure carried at each height
/// (each grid cell contributes measure h^3).
struct RearrangementProfile {
    struct Step {
        double height;
        double measure;
    };
    std::vector<Step> steps;   // heights strictly decreasing, measures > 0
    double total_measure = 0;  // n^3 h^3, including the zero set

    /// Value f*(t); zero beyond the support measure.
    double value_at(double t) const;
    double support_measure() const;
};

RearrangementProfile rearrange(const GridFunction& f);

/// Lorentz quasi-norm (int_0^inf (t^(1/p) f*(t))^q dt/t)^(1/q); for
/// q = infinity, sup_t t^(1/p) f*(t). Step profiles make every increment
/// closed-form, so the only error is roundoff.
double lorentz_norm(const RearrangementProfile& prof, double p, double q);
double lorentz_norm(const GridFunction& f, double p, double q);

/// One atom of an L^p atomic decomposition. `payload` holds the original
/// function values on `support` (so reconstruction is bitwise); the
/// normalized atom is payload / alpha with sup modulus `height`, and
/// height^p * measure(support) = 1 up to roundoff.
struct AtomEntry {
    double alpha = 0;
    double height = 0;
    int nominal_k = 0;       // dyadic size tag 2^k from the construction
    bool boundary = false;   // top/bottom leftover piece, no dyadic tag
    std::vector<std::size_t> support;
    std::vector<complexd> payload;

    double support_measure(const Grid3& g) const
    {
        return static_cast<double>(support.size()) * g.cell_volume();
    }
};

struct AtomicDecomposition {
    Grid3 grid;
    int components = 1;
    double p = 1;
    std::vector<AtomEntry> entries; // ordered by decreasing height

    std::vector<double> alphas() const;
    double alpha_lq_norm(double q) const;
};

/// Splits f into L^p atoms with pairwise disjoint supports following the
/// dyadic level-set construction: interior pieces carry strictly increasing
/// dyadic size tags, plus at most one leftover piece at each end.
/// Throws on identically zero input.
AtomicDecomposition atomic_decompose(const GridFunction& f, double p);

/// Sum of alpha_l * atom_l; exact (bitwise) against the decomposed input.
/// Throws if entry supports overlap.
GridFunction reconstruct(const AtomicDecomposition& d);

/// K(t, f) = inf over f = f0 + f1 of ||f0||_1 + t ||f1||_2 at the couple
/// (L^1, L^2). The optimal split truncates |f| at a level, so the infimum
/// is found exactly by scanning profile breakpoints plus the per-interval
/// analytic optimum.
double k_functional(const GridFunction& f, double t);
double k_functional(const RearrangementProfile& prof, double t);

struct InterpolationResult {
    double value = 0;
    bool converged = true;
    double tail_fraction = 0; // analytic tail share of the total
};

/// Real-interpolation norm int_0^inf t^(-theta) K(t, f) dt/t for the couple
/// (L^1, L^2). Quadrature runs on a log grid over [1e-6, 1e6], refined until
/// the relative change is below 1e-4; the exact linear/constant tails of
/// K outside the window are added in closed form.
InterpolationResult interpolation_norm(const GridFunction& f, double theta, double q);

} // namespace speclab

#endif
