// SPDX-License-Identifier: Apache-2.0

#include "speclab/resolvent.hpp"

#include <cmath>

#include "speclab/fft.hpp"
#include "speclab/lorentz.hpp"
#include "speclab/propagator.hpp"

namespace speclab {

namespace {

// Nodes/weights of 12-point Gauss-Legendre on [0, 1], generated once.
struct Gauss12 {
    std::array<double, 12> x{}, w{};
    Gauss12()
    {
        const int N = 12;
        for (int i = 0; i < N; ++i) {
            double t = std::cos(M_PI * (i + 0.75) / (N + 0.5));
            for (int it = 0; it < 60; ++it) {
                double p0 = 1, p1 = t;
                for (int k = 2; k <= N; ++k) {
                    double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                double dp = N * (t * p1 - p0) / (t * t - 1);
                double dt = p1 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-15)
                    break;
            }
            double p0 = 1, p1 = t;
            for (int k = 2; k <= N; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = N * (t * p1 - p0) / (t * t - 1);
            x[i] = 0.5 * (t + 1.0);
            w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
        }
    }
};
const Gauss12 g12;

// Cell average over [-h/2, h/2]^3 of a bounded radial function.
template <typename F>
complexd cell_average(double h, F&& f)
{
    complexd acc(0, 0);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j)
            for (int k = 0; k < 12; ++k) {
                double ux = h * (g12.x[i] - 0.5);
                double uy = h * (g12.x[j] - 0.5);
                double uz = h * (g12.x[k] - 0.5);
                double r = std::sqrt(ux * ux + uy * uy + uz * uz);
                acc += g12.w[i] * g12.w[j] * g12.w[k] * f(r);
            }
    return acc; // weights sum to 1 per axis
}

struct KernelRoots {
    complexd z; // oscillatory root (scalar, or matrix component 2)
    complexd w; // decaying root of the gap component (matrix only)
};

KernelRoots roots_for(const ResolventQuery& q, const HamiltonianSpec& h)
{
    complexd lam = q.lambda;
    if (q.eta > 0.0)
        lam += complexd(0.0, q.branch == Branch::minus_i0 ? -q.eta : q.eta);
    KernelRoots r;
    if (h.kind == HamiltonianKind::scalar) {
        r.z = osc_root(lam, q.branch);
    } else {
        r.z = osc_root(lam - h.mu, q.branch);
        r.w = dec_root(lam + h.mu, q.branch);
    }
    return r;
}

} // namespace

complexd osc_root(complexd u, Branch b)
{
    if (u.imag() == 0.0 && u.real() >= 0.0) {
        double s = std::sqrt(u.real());
        return b == Branch::minus_i0 ? complexd(-s, 0.0) : complexd(s, 0.0);
    }
    complexd s = std::complex<double>(0, 1) * std::sqrt(-u);
    if (s.imag() < 0.0)
        s = -s;
    return s;
}

complexd dec_root(complexd u, Branch b)
{
    if (u.imag() == 0.0 && u.real() <= 0.0) {
        double s = std::sqrt(-u.real());
        return b == Branch::minus_i0 ? complexd(0.0, -s) : complexd(0.0, s);
    }
    return std::sqrt(u); // principal branch has Re >= 0 off the cut
}

std::array<complexd, 4> free_resolvent_kernel(const std::array<double, 3>& rvec,
                                              const ResolventQuery& q, const HamiltonianSpec& h)
{
    double r = std::sqrt(rvec[0] * rvec[0] + rvec[1] * rvec[1] + rvec[2] * rvec[2]);
    if (r <= 0.0)
        throw std::invalid_argument("free_resolvent_kernel: zero displacement");
    KernelRoots roots = roots_for(q, h);
    double c = 1.0 / (4.0 * M_PI * r);
    if (h.kind == HamiltonianKind::scalar) {
        complexd v = c * std::exp(complexd(0, 1) * roots.z * r);
        return {v, 0.0, 0.0, 0.0};
    }
    complexd k11 = -c * std::exp(-roots.w * r);
    complexd k22 = c * std::exp(complexd(0, 1) * roots.z * r);
    return {k11, 0.0, 0.0, k22};
}

complexd singular_cell_weight(complexd z, double h)
{
    complexd rem = cell_average(h, [&](double r) -> complexd {
        if (r < 1e-300)
            return complexd(0, 1) * z / (4.0 * M_PI);
        return (std::exp(complexd(0, 1) * z * r) - 1.0) / (4.0 * M_PI * r);
    });
    return kLatticeCorrectionUnit / (4.0 * M_PI * h) + rem;
}

complexd singular_cell_weight_gap(complexd w, double h)
{
    complexd rem = cell_average(h, [&](double r) -> complexd {
        if (r < 1e-300)
            return w / (4.0 * M_PI);
        return -(std::exp(-w * r) - 1.0) / (4.0 * M_PI * r);
    });
    return -kLatticeCorrectionUnit / (4.0 * M_PI * h) + rem;
}

GridFunction apply_free_resolvent(const GridFunction& f, const ResolventQuery& q,
                                  const HamiltonianSpec& h)
{
    if (f.components() != h.components())
        throw std::invalid_argument("apply_free_resolvent: component count mismatch");
    const Grid3& g = f.grid();
    const int n = g.n;
    const std::size_t npts = g.point_count();
    const double half_box = 0.5 * g.box_length;
    KernelRoots roots = roots_for(q, h);

    GridFunction out(g, f.components());
    std::vector<complexd> kern(npts);
    for (int c = 0; c < f.components(); ++c) {
        std::size_t idx = 0;
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy)
                for (int iz = 0; iz < n; ++iz, ++idx) {
                    double dx = g.min_image(ix * g.spacing());
                    double dy = g.min_image(iy * g.spacing());
                    double dz = g.min_image(iz * g.spacing());
                    double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                    if (r == 0.0) {
                        if (h.kind == HamiltonianKind::scalar || c == 1)
                            kern[idx] = singular_cell_weight(roots.z, g.spacing());
                        else
                            kern[idx] = singular_cell_weight_gap(roots.w, g.spacing());
                    } else if (r > half_box) {
                        kern[idx] = 0.0;
                    } else {
                        double cc = 1.0 / (4.0 * M_PI * r);
                        if (h.kind == HamiltonianKind::scalar || c == 1)
                            kern[idx] = cc * std::exp(complexd(0, 1) * roots.z * r);
                        else
                            kern[idx] = -cc * std::exp(-roots.w * r);
                    }
                }
        // Cyclic convolution by raw FFTs: out = IDFT(DFT(K) DFT(f)) h^3 / n^3.
        std::vector<complexd> fc(f.component_data(c), f.component_data(c) + npts);
        fft::transform3d(kern.data(), n, -1);
        fft::transform3d(fc.data(), n, -1);
        double scale = g.cell_volume() / static_cast<double>(npts);
        for (std::size_t i = 0; i < npts; ++i)
            fc[i] *= kern[i] * scale;
        fft::transform3d(fc.data(), n, +1);
        std::copy(fc.begin(), fc.end(), out.component_data(c));
    }
    return out;
}

FourierLimitResult fourier_limit_check(const GridFunction& f, complexd lambda, double rho,
                                       const HamiltonianSpec& h, double dt, double boundary_tol)
{
    const Grid3& g = f.grid();
    const int n = g.n;
    const long N = std::lround(rho / dt);

    GridFunction hat = spectral_transform(f, TransformDirection::forward);
    GridFunction acc_one = hat, acc_two = hat;
    const bool real_lambda = lambda.imag() == 0.0;

    // Trapezoid sum of e^{i t (m - lambda)} over t = 0..rho as a geometric
    // series per mode.
    auto trapezoid_factor = [&](double m, int sign) -> complexd {
        complexd q = std::exp(complexd(0, 1) * dt * static_cast<double>(sign) *
                              (complexd(m, 0) - lambda));
        if (std::abs(q - 1.0) < 1e-9) {
            complexd s = 0.5 + 0.5 * std::pow(q, static_cast<double>(N));
            for (long k = 1; k < N; ++k)
                s += std::pow(q, static_cast<double>(k));
            return s * dt;
        }
        complexd qN = std::pow(q, static_cast<double>(N));
        complexd sum = q * (1.0 - qN / q) / (1.0 - q) + 0.5 + 0.5 * qN;
        return sum * dt;
    };

    for (int c = 0; c < f.components(); ++c) {
        complexd* one = acc_one.component_data(c);
        complexd* two = acc_two.component_data(c);
        std::size_t idx = 0;
        for (int kx = 0; kx < n; ++kx) {
            double xix = g.wavenumber(kx);
            for (int ky = 0; ky < n; ++ky) {
                double xiy = g.wavenumber(ky);
                for (int kz = 0; kz < n; ++kz, ++idx) {
                    double xiz = g.wavenumber(kz);
                    double m = h.symbol(c, xix * xix + xiy * xiy + xiz * xiz);
                    complexd fwd = trapezoid_factor(m, +1);
                    one[idx] *= fwd;
                    if (real_lambda)
                        two[idx] *= fwd + trapezoid_factor(m, -1);
                }
            }
        }
    }

    FourierLimitResult res;
    res.lhs = spectral_transform(acc_one, TransformDirection::inverse);
    GridFunction r0f = apply_free_resolvent(f, ResolventQuery::at(lambda, Branch::minus_i0), h);
    res.rhs = complexd(0, 1) * r0f;
    res.discrepancy = lorentz_norm(res.lhs - res.rhs, 6.0, std::numeric_limits<double>::infinity());
    res.flagged = boundary_mass_fraction(free_evolve(f, rho, h)) > boundary_tol;

    if (real_lambda) {
        res.has_two_sided = true;
        GridFunction lhs2 = spectral_transform(acc_two, TransformDirection::inverse);
        GridFunction jump =
            apply_free_resolvent(f, ResolventQuery::at(lambda, Branch::minus_i0), h) -
            apply_free_resolvent(f, ResolventQuery::at(lambda, Branch::plus_i0), h);
        GridFunction rhs2 = complexd(0, 1) * jump;
        res.two_sided_discrepancy =
            lorentz_norm(lhs2 - rhs2, 6.0, std::numeric_limits<double>::infinity());
    }
    return res;
}

} // namespace speclab
