// SPDX-License-Identifier: Apache-2.0

#include "speclab/propagator.hpp"

#include <cmath>

#include "speclab/fft.hpp"
#include "speclab/lorentz.hpp"

namespace speclab {

namespace {

void apply_free_multiplier(GridFunction& f, double t, const HamiltonianSpec& h,
                           const std::array<double, 3>* v = nullptr)
{
    const Grid3& g = f.grid();
    const int n = g.n;
    for (int c = 0; c < f.components(); ++c) {
        complexd* data = f.component_data(c);
        std::size_t idx = 0;
        for (int kx = 0; kx < n; ++kx) {
            double xix = g.wavenumber(kx);
            for (int ky = 0; ky < n; ++ky) {
                double xiy = g.wavenumber(ky);
                for (int kz = 0; kz < n; ++kz, ++idx) {
                    double xiz = g.wavenumber(kz);
                    double xi2 = xix * xix + xiy * xiy + xiz * xiz;
                    double phase = t * h.symbol(c, xi2);
                    if (v)
                        phase += t * ((*v)[0] * xix + (*v)[1] * xiy + (*v)[2] * xiz);
                    data[idx] *= std::polar(1.0, phase);
                }
            }
        }
    }
}

complexd sinc_c(complexd x)
{
    if (std::abs(x) < 1e-6) {
        complexd x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

} // namespace

std::array<complexd, 4> potential_block_exp(double a, complexd w1, complexd w2)
{
    complexd D = w1 * w1 - std::norm(w2);
    complexd delta = std::sqrt(D);
    complexd c = std::cos(a * delta);
    complexd s = complexd(0, 1) * a * sinc_c(a * delta);
    return {c + s * w1, s * w2, -s * std::conj(w2), c - s * w1};
}

GridFunction free_evolve(const GridFunction& f, double t, const HamiltonianSpec& h)
{
    if (f.components() != h.components())
        throw std::invalid_argument("free_evolve: component count mismatch");
    if (t == 0.0)
        return f;
    GridFunction hat = spectral_transform(f, TransformDirection::forward);
    apply_free_multiplier(hat, t, h);
    return spectral_transform(hat, TransformDirection::inverse);
}

DispersiveRatio dispersive_ratio(const GridFunction& f, double t, const HamiltonianSpec& h,
                                 double boundary_tol)
{
    if (!(t > 0.0))
        throw std::invalid_argument("dispersive_ratio: t must be positive");
    GridFunction Z = free_evolve(f, t, h);
    DispersiveRatio r;
    r.boundary_mass = boundary_mass_fraction(Z);
    r.reliable = r.boundary_mass <= boundary_tol;
    const double inf = std::numeric_limits<double>::infinity();
    r.value = lp_norm(Z, inf) * std::pow(t, 1.5) / lp_norm(f, 1.0);
    return r;
}

DyadicSum dyadic_sum(const GridFunction& f, const HamiltonianSpec& h, int n_min, int n_max,
                     int samples_per_octave, double boundary_tol)
{
    DyadicSum out;
    GridFunction hat = spectral_transform(f, TransformDirection::forward);
    for (int n = n_min; n <= n_max; ++n) {
        double t_lo = std::ldexp(1.0, n);
        double best = -1.0;
        for (int s = 0; s < samples_per_octave; ++s) {
            double t = t_lo * std::pow(2.0, static_cast<double>(s) / samples_per_octave);
            GridFunction zhat = hat;
            apply_free_multiplier(zhat, t, h);
            GridFunction Z = spectral_transform(zhat, TransformDirection::inverse);
            if (boundary_mass_fraction(Z) > boundary_tol)
                continue;
            best = std::max(best, lorentz_norm(Z, 6.0, std::numeric_limits<double>::infinity()));
        }
        if (best < 0.0) {
            out.excluded_octaves.push_back(n);
            continue;
        }
        out.octaves.push_back(n);
        out.terms.push_back(t_lo * best);
        out.total += t_lo * best;
    }
    return out;
}

bool Trajectory::any_flagged() const
{
    for (char f : flagged)
        if (f)
            return true;
    return false;
}

Trajectory duhamel_solve(const Scenario& scn, const GridFunction& Z0, const DuhamelOptions& opt)
{
    if (!(opt.dt > 0.0))
        throw std::invalid_argument("duhamel_solve: dt must be positive");
    const HamiltonianSpec& h = scn.hamiltonian;
    if (Z0.components() != h.components())
        throw std::invalid_argument("duhamel_solve: component count mismatch");
    const Grid3& g = scn.grid;
    const std::size_t npts = g.point_count();
    const long steps = std::lround(opt.T / opt.dt);
    const long stride = opt.record_stride > 0 ? opt.record_stride : std::max(1L, steps / 128);

    const bool moving = opt.mode == TimeDependence::moving_potential;
    const bool transformed = opt.mode == TimeDependence::transformed_frame;
    if ((moving || transformed) && !scn.frame.enabled)
        throw std::invalid_argument("duhamel_solve: time-dependent mode needs a frame");

    // Harmonic frame profile: v(t) = v_amp cos(w t), A(t) = a_amp cos(w t),
    // with closed-form accumulated translation y(t) and phase theta(t).
    auto frame_v = [&](double t) -> std::array<double, 3> {
        double c = std::cos(scn.frame.omega * t);
        return {scn.frame.v_amp[0] * c, scn.frame.v_amp[1] * c, scn.frame.v_amp[2] * c};
    };
    auto frame_A = [&](double t) { return scn.frame.a_amp * std::cos(scn.frame.omega * t); };
    auto frame_y = [&](double t) -> std::array<double, 3> {
        double s = std::sin(scn.frame.omega * t) / scn.frame.omega;
        return {scn.frame.v_amp[0] * s, scn.frame.v_amp[1] * s, scn.frame.v_amp[2] * s};
    };
    auto frame_theta = [&](double t) {
        return scn.frame.a_amp * std::sin(scn.frame.omega * t) / scn.frame.omega;
    };

    std::vector<complexd> half_scalar;
    std::vector<std::array<complexd, 4>> half_block;
    if (!moving && !transformed) {
        if (h.kind == HamiltonianKind::scalar) {
            half_scalar.resize(npts);
            for (std::size_t i = 0; i < npts; ++i)
                half_scalar[i] = std::exp(complexd(0, 1) * (0.5 * opt.dt) * scn.v[i]);
        } else {
            half_block.resize(npts);
            for (std::size_t i = 0; i < npts; ++i)
                half_block[i] = potential_block_exp(0.5 * opt.dt, scn.w1[i], scn.w2[i]);
        }
    }

    auto apply_block = [&](GridFunction& Z, std::size_t i, const std::array<complexd, 4>& E) {
        complexd a = Z.at(0, i), b = Z.at(1, i);
        Z.at(0, i) = E[0] * a + E[1] * b;
        Z.at(1, i) = E[2] * a + E[3] * b;
    };

    auto apply_half_potential = [&](GridFunction& Z, double t_mid) {
        if (moving) {
            auto y = frame_y(t_mid);
            double limit = 0.25 * g.box_length;
            if (std::abs(y[0]) >= limit || std::abs(y[1]) >= limit || std::abs(y[2]) >= limit)
                throw std::runtime_error("duhamel_solve: frame translation violates the margin");
            double th = frame_theta(t_mid);
            if (h.kind == HamiltonianKind::scalar) {
                GridFunction vshift = realize_shape_shifted(*scn.v_shape, g, y);
                for (std::size_t i = 0; i < npts; ++i)
                    Z[i] *= std::exp(complexd(0, 1) * (0.5 * opt.dt) * vshift[i]);
            } else {
                GridFunction w1s = realize_shape_shifted(*scn.w1_shape, g, y);
                GridFunction w2s = realize_shape_shifted(*scn.w2_shape, g, y);
                complexd rot = std::polar(1.0, -2.0 * th);
                for (std::size_t i = 0; i < npts; ++i)
                    apply_block(Z, i, potential_block_exp(0.5 * opt.dt, w1s[i], rot * w2s[i]));
            }
            return;
        }
        if (transformed) {
            // A(t) sigma3 joins the pointwise step alongside the potential.
            double A = frame_A(t_mid);
            if (h.kind == HamiltonianKind::scalar) {
                for (std::size_t i = 0; i < npts; ++i)
                    Z[i] *= std::exp(complexd(0, 1) * (0.5 * opt.dt) * (scn.v[i] + A));
            } else {
                for (std::size_t i = 0; i < npts; ++i)
                    apply_block(Z, i, potential_block_exp(0.5 * opt.dt, scn.w1[i] + A, scn.w2[i]));
            }
            return;
        }
        if (h.kind == HamiltonianKind::scalar) {
            for (std::size_t i = 0; i < npts; ++i)
                Z[i] *= half_scalar[i];
        } else {
            for (std::size_t i = 0; i < npts; ++i)
                apply_block(Z, i, half_block[i]);
        }
    };

    auto apply_free_step = [&](GridFunction& Z, double dt_step, double t_mid) {
        GridFunction hat = spectral_transform(Z, TransformDirection::forward);
        if (transformed) {
            auto v = frame_v(t_mid);
            apply_free_multiplier(hat, dt_step, h, &v);
        } else {
            apply_free_multiplier(hat, dt_step, h);
        }
        Z = spectral_transform(hat, TransformDirection::inverse);
    };

    Trajectory traj;
    traj.dt = opt.dt;
    GridFunction Z = Z0;
    GridFunction Fbuf(g, h.components());

    auto record = [&](long step) {
        traj.times.push_back(step * opt.dt);
        traj.states.push_back(Z);
        double bm = boundary_mass_fraction(Z);
        traj.boundary_mass.push_back(bm);
        traj.flagged.push_back(bm > opt.boundary_tol ? 1 : 0);
    };
    record(0);

    for (long s = 0; s < steps; ++s) {
        double t_mid = (s + 0.5) * opt.dt;
        apply_half_potential(Z, t_mid);
        apply_free_step(Z, opt.dt, t_mid);
        apply_half_potential(Z, t_mid);
        if (opt.forcing) {
            // Midpoint source propagated half a step keeps second order.
            opt.forcing(t_mid, Fbuf);
            apply_half_potential(Fbuf, t_mid);
            apply_free_step(Fbuf, 0.5 * opt.dt, t_mid);
            for (std::size_t i = 0; i < Fbuf.size(); ++i)
                Z[i] -= complexd(0, 1) * opt.dt * Fbuf[i];
        }
        if ((s + 1) % 16 == 0 && !Z.all_finite())
            throw std::runtime_error("duhamel_solve: state went non-finite at t = " +
                                     format_float((s + 1) * opt.dt));
        if ((s + 1) % stride == 0 || s + 1 == steps)
            record(s + 1);
    }
    if (!Z.all_finite())
        throw std::runtime_error("duhamel_solve: final state is non-finite");
    return traj;
}

} // namespace speclab
