// SPDX-License-Identifier: Apache-2.0

#include "speclab/strichartz.hpp"

#include <cmath>

#include "speclab/lorentz.hpp"

namespace speclab {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

GridFunction weight_multiply(const GridFunction& f, int N)
{
    const Grid3& g = f.grid();
    GridFunction out = f;
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx) {
                auto p = g.point(ix, iy, iz);
                double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                double w = std::pow(1.0 + r2, -0.5 * N);
                for (int c = 0; c < f.components(); ++c)
                    out.at(c, idx) *= w;
            }
    return out;
}

GridFunction translate_phase(const GridFunction& f, const std::array<double, 3>& y, double theta,
                             bool inverse)
{
    const Grid3& g = f.grid();
    double limit = 0.25 * g.box_length;
    if (std::abs(y[0]) >= limit || std::abs(y[1]) >= limit || std::abs(y[2]) >= limit)
        throw std::runtime_error("apply_frame: translation violates the L/4 margin");
    GridFunction hat = spectral_transform(f, TransformDirection::forward);
    double sgn = inverse ? -1.0 : 1.0;
    for (int c = 0; c < f.components(); ++c) {
        complexd* data = hat.component_data(c);
        double comp_theta = (f.components() == 2 && c == 1) ? -theta : theta;
        complexd phase_rot = std::polar(1.0, sgn * comp_theta);
        std::size_t idx = 0;
        for (int kx = 0; kx < g.n; ++kx) {
            double xix = g.wavenumber(kx);
            for (int ky = 0; ky < g.n; ++ky) {
                double xiy = g.wavenumber(ky);
                for (int kz = 0; kz < g.n; ++kz, ++idx) {
                    double xiz = g.wavenumber(kz);
                    double shift = xix * y[0] + xiy * y[1] + xiz * y[2];
                    data[idx] *= std::polar(1.0, sgn * shift) * phase_rot;
                }
            }
        }
    }
    return spectral_transform(hat, TransformDirection::inverse);
}

} // namespace

TimeDependentFrame TimeDependentFrame::from_spec(const FrameSpec& spec, double T, double dt)
{
    TimeDependentFrame fr;
    fr.dt = dt;
    const long n = std::lround(T / dt);
    fr.v.resize(n + 1);
    fr.A.resize(n + 1);
    fr.y.resize(n + 1);
    fr.theta.resize(n + 1);
    for (long j = 0; j <= n; ++j) {
        double t = j * dt;
        double c = std::cos(spec.omega * t);
        fr.v[j] = {spec.v_amp[0] * c, spec.v_amp[1] * c, spec.v_amp[2] * c};
        fr.A[j] = spec.a_amp * c;
        fr.v_sup = std::max({fr.v_sup, std::abs(fr.v[j][0]), std::abs(fr.v[j][1]),
                             std::abs(fr.v[j][2])});
        fr.a_sup = std::max(fr.a_sup, std::abs(fr.A[j]));
        if (j == 0) {
            fr.y[0] = {0, 0, 0};
            fr.theta[0] = 0;
        } else {
            for (int a = 0; a < 3; ++a)
                fr.y[j][a] = fr.y[j - 1][a] + 0.5 * dt * (fr.v[j - 1][a] + fr.v[j][a]);
            fr.theta[j] = fr.theta[j - 1] + 0.5 * dt * (fr.A[j - 1] + fr.A[j]);
        }
    }
    return fr;
}

namespace {

template <typename T>
T interp(const std::vector<T>& samples, double t, double dt);

template <>
double interp(const std::vector<double>& s, double t, double dt)
{
    double u = t / dt;
    long j = std::lround(std::floor(u));
    if (j < 0)
        return s.front();
    if (j + 1 >= static_cast<long>(s.size()))
        return s.back();
    double w = u - j;
    return (1 - w) * s[j] + w * s[j + 1];
}

template <>
std::array<double, 3> interp(const std::vector<std::array<double, 3>>& s, double t, double dt)
{
    double u = t / dt;
    long j = std::lround(std::floor(u));
    if (j < 0)
        return s.front();
    if (j + 1 >= static_cast<long>(s.size()))
        return s.back();
    double w = u - j;
    return {(1 - w) * s[j][0] + w * s[j + 1][0], (1 - w) * s[j][1] + w * s[j + 1][1],
            (1 - w) * s[j][2] + w * s[j + 1][2]};
}

} // namespace

std::array<double, 3> TimeDependentFrame::y_at(double t) const { return interp(y, t, dt); }
double TimeDependentFrame::theta_at(double t) const { return interp(theta, t, dt); }
std::array<double, 3> TimeDependentFrame::v_at(double t) const { return interp(v, t, dt); }
double TimeDependentFrame::a_at(double t) const { return interp(A, t, dt); }

double TimeDependentFrame::accumulation_residual() const
{
    // Re-integrate by the same trapezoid rule and compare end to end.
    double res = 0;
    std::array<double, 3> yy = {0, 0, 0};
    double th = 0;
    for (std::size_t j = 1; j < v.size(); ++j) {
        for (int a = 0; a < 3; ++a)
            yy[a] += 0.5 * dt * (v[j - 1][a] + v[j][a]);
        th += 0.5 * dt * (A[j - 1] + A[j]);
        res = std::max(res, std::abs(th - theta[j]));
        for (int a = 0; a < 3; ++a)
            res = std::max(res, std::abs(yy[a] - y[j][a]));
    }
    return res;
}

GridFunction apply_frame(const GridFunction& f, const TimeDependentFrame& frame, double t,
                         bool inverse)
{
    return translate_phase(f, frame.y_at(t), frame.theta_at(t), inverse);
}

double mixed_norm(const Trajectory& traj, double p_t, double p_x, double q_x)
{
    if (traj.size() == 0)
        return 0.0;
    std::vector<double> vals(traj.size(), 0.0);
    std::vector<char> ok(traj.size(), 0);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj.flagged[k])
            continue;
        ok[k] = 1;
        vals[k] = lorentz_norm(traj.states[k], p_x, q_x);
    }
    if (std::isinf(p_t)) {
        double m = 0;
        for (std::size_t k = 0; k < traj.size(); ++k)
            if (ok[k])
                m = std::max(m, vals[k]);
        return m;
    }
    // Trapezoid over the recorded (possibly flag-punctured) time grid.
    double acc = 0;
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        if (!ok[k] || !ok[k + 1])
            continue;
        double dt = traj.times[k + 1] - traj.times[k];
        acc += 0.5 * dt * (std::pow(vals[k], p_t) + std::pow(vals[k + 1], p_t));
    }
    return std::pow(acc, 1.0 / p_t);
}

MixedNormReport strichartz_quotients(const Scenario& scn, const ProjectionSet& proj,
                                     const std::vector<StrichartzDatum>& family, double T,
                                     double dt, bool time_dependent, bool apply_projection)
{
    // Standing assumption: no detected exceptional values inside the
    // continuous spectrum.
    for (complexd z : proj.eigenvalues) {
        bool embedded = scn.is_matrix() ? std::abs(z.real()) >= scn.hamiltonian.mu - 1e-6
                                        : z.real() >= -1e-6;
        if (embedded)
            throw std::runtime_error(
                "strichartz_quotients: detected exceptional value inside the continuous "
                "spectrum at lambda = " +
                format_float(z.real()));
    }

    MixedNormReport rep;
    rep.T = T;
    rep.dt = dt;
    rep.projected = apply_projection;

    TimeDependentFrame frame;
    if (time_dependent) {
        if (!scn.frame.enabled)
            throw std::invalid_argument("strichartz_quotients: scenario has no frame");
        frame = TimeDependentFrame::from_spec(scn.frame, T, dt / 2.0);
    }

    for (const auto& datum : family) {
        DuhamelOptions opt;
        opt.T = T;
        opt.dt = dt;
        opt.mode = time_dependent ? TimeDependence::moving_potential
                                  : TimeDependence::static_potential;
        opt.boundary_tol = scn.tol.boundary_mass;
        double f_l1l2 = 0, f_l1l651 = 0;
        if (datum.forcing_profile.size() > 0) {
            opt.forcing = [&](double t, GridFunction& out) {
                out = datum.forcing_profile;
                out *= std::cos(datum.forcing_omega * t);
            };
            // L1-in-time norms of the forcing over [0, T].
            double n2 = lp_norm(datum.forcing_profile, 2.0);
            double n651 = lorentz_norm(datum.forcing_profile, 6.0 / 5.0, 1.0);
            const int nq = 256;
            for (int i = 0; i < nq; ++i) {
                double t = T * (i + 0.5) / nq;
                double c = std::abs(std::cos(datum.forcing_omega * t));
                f_l1l2 += c * n2 * T / nq;
                f_l1l651 += c * n651 * T / nq;
            }
        }
        Trajectory traj = duhamel_solve(scn, datum.z0, opt);

        // Project the recorded states.
        Trajectory ptraj = traj;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            if (!apply_projection)
                break;
            if (time_dependent) {
                GridFunction moved = apply_frame(traj.states[k], frame, traj.times[k], false);
                moved = apply_pc_grid(proj, moved);
                ptraj.states[k] = apply_frame(moved, frame, traj.times[k], true);
            } else {
                ptraj.states[k] = apply_pc_grid(proj, traj.states[k]);
            }
        }
        for (char f : traj.flagged)
            rep.flagged_samples += f ? 1 : 0;

        double z0_l2 = lp_norm(datum.z0, 2.0);
        double z0_651 = lorentz_norm(datum.z0, 6.0 / 5.0, 1.0);
        double z0_q = lorentz_norm(datum.z0, 1.5, 4.0 / 3.0);

        std::vector<QuotientRow> rows;
        {
            QuotientRow q;
            q.name = "Q1";
            q.numerator = std::max(mixed_norm(ptraj, kInf, 2.0, 2.0),
                                   mixed_norm(ptraj, 2.0, 6.0, 2.0));
            q.denominator = z0_l2 + f_l1l2;
            q.quotient = q.denominator > 0 ? q.numerator / q.denominator : 0;
            rows.push_back(q);
        }
        {
            QuotientRow q;
            q.name = "Q2";
            q.numerator = mixed_norm(ptraj, 1.0, 6.0, kInf);
            q.denominator = z0_651 + f_l1l651;
            q.quotient = q.denominator > 0 ? q.numerator / q.denominator : 0;
            rows.push_back(q);
        }
        {
            QuotientRow q;
            q.name = "Qint";
            q.numerator = mixed_norm(ptraj, 4.0 / 3.0, 6.0, 4.0 / 3.0);
            q.denominator = z0_q + f_l1l651; // forcing folded into the L1 route
            q.quotient = q.denominator > 0 ? q.numerator / q.denominator : 0;
            rows.push_back(q);
        }
        rep.per_datum.push_back(std::move(rows));
    }
    return rep;
}

FrameChecksReport frame_property_checks(const Scenario& scn, const ProjectionSet& proj,
                                        int n_amplitudes, double T)
{
    if (!scn.frame.enabled)
        throw std::invalid_argument("frame_property_checks: scenario has no frame");
    const int N = 4; // <x>^-N weight exponent
    FrameChecksReport rep;
    const Grid3& g = scn.grid;

    GridFunction probe(g, scn.hamiltonian.components());
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx) {
                auto p = g.point(ix, iy, iz);
                double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                probe.at(0, idx) = std::exp(-r2 / 2.0) * complexd(1.0, 0.4);
            }

    const double dt = 1.0 / 128.0;
    TimeDependentFrame base = TimeDependentFrame::from_spec(scn.frame, T, dt);
    rep.accumulation_residual = base.accumulation_residual();

    // P1/P2 at the base amplitude.
    double t_probe = 0.7 * T;
    GridFunction uf = apply_frame(probe, base, t_probe, false);
    for (double p : {1.0, 2.0, kInf})
        rep.p1_deviation =
            std::max(rep.p1_deviation, std::abs(lp_norm(uf, p) / lp_norm(probe, p) - 1.0));
    GridFunction back = apply_frame(uf, base, t_probe, true);
    rep.p2_inverse_error = lp_norm(back - probe, 2.0) / lp_norm(probe, 2.0);
    double s_ev = 0.4;
    GridFunction lhs =
        apply_frame(free_evolve(probe, s_ev, scn.hamiltonian), base, t_probe, false);
    GridFunction rhs =
        free_evolve(apply_frame(probe, base, t_probe, false), s_ev, scn.hamiltonian);
    rep.p2_commute_error = lp_norm(lhs - rhs, 2.0) / lp_norm(probe, 2.0);

    GridFunction wprobe = weight_multiply(probe, N);
    for (int a = 0; a < n_amplitudes; ++a) {
        double scale = std::ldexp(1.0, -a); // 1, 1/2, 1/4, ...
        FrameSpec scaled = scn.frame;
        for (int i = 0; i < 3; ++i)
            scaled.v_amp[i] *= scale;
        scaled.a_amp *= scale;
        TimeDependentFrame fr = TimeDependentFrame::from_spec(scaled, T, dt);
        rep.amplitude_scales.push_back(scale);

        // P3: power iteration for the weighted kernel-difference norm,
        // sampled over time gaps and aggregated as a mass norm.
        double tau0 = 0.25 * T;
        std::vector<double> gaps = {0.25, 0.5, 1.0, 2.0};
        double aggregate = 0;
        for (std::size_t gi = 0; gi < gaps.size(); ++gi) {
            double s = gaps[gi];
            if (tau0 + s > T)
                break;
            auto apply_M = [&](const GridFunction& x) {
                GridFunction wx = weight_multiply(x, N);
                GridFunction ev = free_evolve(wx, s, scn.hamiltonian);
                GridFunction moved = translate_phase(
                    ev,
                    {fr.y_at(tau0 + s)[0] - fr.y_at(tau0)[0],
                     fr.y_at(tau0 + s)[1] - fr.y_at(tau0)[1],
                     fr.y_at(tau0 + s)[2] - fr.y_at(tau0)[2]},
                    fr.theta_at(tau0 + s) - fr.theta_at(tau0), false);
                return weight_multiply(moved - ev, N);
            };
            auto apply_Mt = [&](const GridFunction& x) {
                GridFunction wx = weight_multiply(x, N);
                GridFunction moved_back = translate_phase(
                    wx,
                    {fr.y_at(tau0 + s)[0] - fr.y_at(tau0)[0],
                     fr.y_at(tau0 + s)[1] - fr.y_at(tau0)[1],
                     fr.y_at(tau0 + s)[2] - fr.y_at(tau0)[2]},
                    fr.theta_at(tau0 + s) - fr.theta_at(tau0), true);
                GridFunction diff = moved_back - wx;
                return weight_multiply(free_evolve(diff, -s, scn.hamiltonian), N);
            };
            GridFunction x = wprobe;
            double nrm = 0;
            for (int it = 0; it < 20; ++it) {
                GridFunction y = apply_Mt(apply_M(x));
                nrm = lp_norm(y, 2.0) / std::max(lp_norm(x, 2.0), 1e-300);
                double yn = lp_norm(y, 2.0);
                if (yn < 1e-300)
                    break;
                y *= 1.0 / yn;
                x = y;
            }
            double gap_weight = gi + 1 < gaps.size() ? gaps[gi + 1] - gaps[gi] : gaps[gi];
            aggregate += std::sqrt(nrm) * gap_weight;
        }
        rep.p3_aggregate.push_back(aggregate);

        // P4: Lipschitz slope of t -> P_c(t) on the probe.
        double slope = 0;
        std::vector<std::pair<double, double>> pairs = {
            {0.2, 0.5}, {0.5, 1.0}, {1.0, 1.8}, {1.8, 2.6}};
        auto pc_t = [&](double t, const GridFunction& x) {
            GridFunction moved = apply_frame(x, fr, t, false);
            moved = apply_pc_grid(proj, moved);
            return apply_frame(moved, fr, t, true);
        };
        for (auto [s_, t_] : pairs) {
            if (t_ > T)
                break;
            GridFunction d = pc_t(t_, probe) - pc_t(s_, probe);
            slope = std::max(slope, lp_norm(d, 2.0) / (t_ - s_));
        }
        rep.p4_slope.push_back(slope);
        double amps = fr.v_sup + fr.a_sup;
        rep.p4_constant.push_back(amps > 0 ? slope / (amps * lp_norm(probe, 2.0)) : 0.0);
    }
    return rep;
}

} // namespace speclab
