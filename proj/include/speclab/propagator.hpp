// SPDX-License-Identifier: Apache-2.0

#ifndef SPECLAB_PROPAGATOR_HPP
#define SPECLAB_PROPAGATOR_HPP

#include <functional>
#include <optional>
#include <vector>

#include "speclab/grid.hpp"
#include "speclab/hamiltonian.hpp"
#include "speclab/scenario.hpp"

namespace speclab {

/// Free evolution: Fourier multiplier e^{i t sym_c(xi)} per component.
/// The sign convention comes from writing the homogeneous equation as
/// dZ/dt = i H0 Z, so the scalar multiplier is e^{i t |xi|^2}.
GridFunction free_evolve(const GridFunction& f, double t, const HamiltonianSpec& h);

struct DispersiveRatio {
    double value = 0;         // ||e^{itH0} f||_inf * t^(3/2) / ||f||_1
    double boundary_mass = 0;
    bool reliable = true;     // false once the boundary-mass flag trips
};

DispersiveRatio dispersive_ratio(const GridFunction& f, double t, const HamiltonianSpec& h,
                                 double boundary_tol = 1e-3);

struct DyadicSum {
    double total = 0;                       // sum over octaves of 2^n * max_t ||.||_{6,inf}
    std::vector<int> octaves;               // octave indices n
    std::vector<double> terms;              // per-octave contributions
    std::vector<int> excluded_octaves;      // octaves lost to the boundary flag
};

/// Dyadic-in-time aggregate of the weak L^6 size of the free evolution:
/// sum over n of 2^n * max over sampled t in [2^n, 2^(n+1)) of
/// ||e^{itH0} f||_{6,inf}, with the sup approximated by log-spaced samples.
/// Flagged times are excluded and reported.
DyadicSum dyadic_sum(const GridFunction& f, const HamiltonianSpec& h, int n_min, int n_max,
                     int samples_per_octave = 8, double boundary_tol = 1e-3);

enum class TimeDependence {
    static_potential,   // V as realized in the scenario
    moving_potential,   // U(t)^{-1} V U(t): translated, phase-conjugated V
    transformed_frame   // static V plus the -i v(t) grad + A(t) sigma3 terms
};

struct DuhamelOptions {
    double T = 8.0;
    double dt = 1.0 / 64.0;
    int record_stride = 0;                 // 0 picks ~128 recorded states
    TimeDependence mode = TimeDependence::static_potential;
    std::function<void(double, GridFunction&)> forcing; // overwrite with F(t); optional
    double boundary_tol = 1e-3;
};

struct Trajectory {
    std::vector<double> times;        // strictly increasing recorded times
    std::vector<GridFunction> states; // one state per recorded time
    std::vector<double> boundary_mass;
    std::vector<char> flagged;
    double dt = 0;

    std::size_t size() const { return times.size(); }
    bool any_flagged() const;
};

/// Second-order Strang splitting for i dZ/dt + (H0 + V(x,t)) Z = F:
/// half potential step, full free step, half potential step, with the
/// matrix-case pointwise block exponentiated in closed form and, for
/// time-dependent modes, the potential evaluated at the step midpoint.
/// Aborts with a diagnostic if the state goes non-finite.
Trajectory duhamel_solve(const Scenario& scn, const GridFunction& Z0,
                         const DuhamelOptions& opt);

/// Pointwise exponential exp(i a M) of the potential block
/// M = [[w1, w2], [-conj(w2), -w1]] (w1 real), via M^2 = (w1^2 - |w2|^2) I.
std::array<complexd, 4> potential_block_exp(double a, complexd w1, complexd w2);

} // namespace speclab

#endif
