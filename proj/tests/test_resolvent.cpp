// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "speclab/lorentz.hpp"
#include "speclab/propagator.hpp"
#include "speclab/resolvent.hpp"

using namespace speclab;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

GridFunction gaussian(const Grid3& g, double s)
{
    GridFunction f(g, 1);
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx) {
                auto p = g.point(ix, iy, iz);
                double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                f[idx] = std::exp(-r2 / (2.0 * s * s));
            }
    return f;
}

} // namespace

TEST_CASE("kernel: pinned closed forms at lambda = -1, 0, mu")
{
    auto hs = HamiltonianSpec::scalar();
    std::array<double, 3> r = {0.3, -0.4, 1.2};
    double rr = std::sqrt(0.09 + 0.16 + 1.44);

    // lambda = -1 (decaying branch): e^{-r}/(4 pi r), real positive.
    auto k = free_resolvent_kernel(r, ResolventQuery::at(-1.0), hs);
    CHECK(k[0].real() == doctest::Approx(std::exp(-rr) / (4 * M_PI * rr)).epsilon(1e-14));
    CHECK(std::abs(k[0].imag()) < 1e-16);

    // lambda = 0: the Newtonian kernel.
    auto k0 = free_resolvent_kernel(r, ResolventQuery::at(0.0), hs);
    CHECK(k0[0].real() == doctest::Approx(1.0 / (4 * M_PI * rr)).epsilon(1e-14));

    // Matrix case at lambda = mu: entries -e^{-sqrt(2 mu) r}/(4 pi r) and 1/(4 pi r).
    double mu = 0.7;
    auto hm = HamiltonianSpec::matrix(mu);
    auto km = free_resolvent_kernel(r, ResolventQuery::at(mu), hm);
    CHECK(km[0].real() ==
          doctest::Approx(-std::exp(-std::sqrt(2 * mu) * rr) / (4 * M_PI * rr)).epsilon(1e-13));
    CHECK(km[3].real() == doctest::Approx(1.0 / (4 * M_PI * rr)).epsilon(1e-13));
    CHECK(std::abs(km[1]) == 0.0);
    CHECK_THROWS(free_resolvent_kernel({0, 0, 0}, ResolventQuery::at(-1.0), hs));
}

TEST_CASE("kernel: branch limits agree with eta-regularized Richardson extrapolation")
{
    auto hs = HamiltonianSpec::scalar();
    std::array<double, 3> r = {0.9, 0.1, -0.2};
    for (double lam : {0.5, 2.0}) {
        for (Branch b : {Branch::minus_i0, Branch::plus_i0}) {
            auto exact = free_resolvent_kernel(r, ResolventQuery::at(lam, b), hs)[0];
            ResolventQuery q1{lam, b, 1e-3}, q2{lam, b, 1e-4};
            auto v1 = free_resolvent_kernel(r, q1, hs)[0];
            auto v2 = free_resolvent_kernel(r, q2, hs)[0];
            // Limits behave like sqrt(eta); Richardson in sqrt(eta).
            double s = std::sqrt(10.0);
            complexd extrap = (s * v2 - v1) / (s - 1.0);
            CHECK(std::abs(extrap - exact) < 5e-4 * std::abs(exact));
            CHECK(std::abs(v2 - exact) < 2e-2 * std::abs(exact));
        }
    }
}

TEST_CASE("apply_free_resolvent inverts (-Delta + 1) on smooth data")
{
    // L = 16 keeps the kernel's own tail beyond the L/2 truncation ball
    // below the target; the grid error itself is far smaller.
    Grid3 g(48, 16.0);
    auto f = gaussian(g, 1.0);
    // Apply (-Delta + 1) spectrally, then resolve at lambda = -1.
    auto hat = spectral_transform(f, TransformDirection::forward);
    std::size_t idx = 0;
    for (int kx = 0; kx < g.n; ++kx)
        for (int ky = 0; ky < g.n; ++ky)
            for (int kz = 0; kz < g.n; ++kz, ++idx) {
                double xi2 = g.wavenumber(kx) * g.wavenumber(kx) +
                             g.wavenumber(ky) * g.wavenumber(ky) +
                             g.wavenumber(kz) * g.wavenumber(kz);
                hat[idx] *= (xi2 + 1.0);
            }
    auto rhs = spectral_transform(hat, TransformDirection::inverse);
    auto back = apply_free_resolvent(rhs, ResolventQuery::at(-1.0), HamiltonianSpec::scalar());
    CHECK(lp_norm(back - f, 2.0) < 1e-3 * lp_norm(f, 2.0));
}

TEST_CASE("apply_free_resolvent: deep lower half-plane bound and linearity")
{
    Grid3 g(32, 12.0);
    auto f = gaussian(g, 1.0);
    auto hs = HamiltonianSpec::scalar();
    auto rf = apply_free_resolvent(f, ResolventQuery::at(complexd(1.0, -25.0)), hs);
    CHECK(lp_norm(rf, 2.0) <= 1.1 * lp_norm(f, 2.0) / 25.0);

    auto g2 = gaussian(g, 0.6);
    auto a = apply_free_resolvent(f + g2, ResolventQuery::at(complexd(0.5, -2.0)), hs);
    auto b = apply_free_resolvent(f, ResolventQuery::at(complexd(0.5, -2.0)), hs) +
             apply_free_resolvent(g2, ResolventQuery::at(complexd(0.5, -2.0)), hs);
    CHECK(lp_norm(a - b, 2.0) < 1e-12 * lp_norm(a, 2.0));
}

TEST_CASE("resolvent identity holds to quadrature accuracy")
{
    Grid3 g(48, 16.0);
    auto f = gaussian(g, 1.0);
    auto hs = HamiltonianSpec::scalar();
    complexd l1(0.7, -1.3), l2(-2.0, 2.0);
    auto r1 = apply_free_resolvent(f, ResolventQuery::at(l1), hs);
    auto r2 = apply_free_resolvent(f, ResolventQuery::at(l2), hs);
    auto r12 = apply_free_resolvent(r2, ResolventQuery::at(l1), hs);
    GridFunction resid = r1 - r2 - (l1 - l2) * r12;
    CHECK(lp_norm(resid, 2.0) <= 1e-2 * lp_norm(f, 2.0));
}

TEST_CASE("branch jump acts on the sphere |xi|^2 = lambda only")
{
    // Data band-limited onto the sphere passes through the jump at full
    // strength; data supported away from it is suppressed. The jump is
    // realized through its time-integral form (the sharp kernel truncation
    // would smear a convolution-based version over scale 1/L).
    Grid3 g(32, 16.0);
    auto hs = HamiltonianSpec::scalar();
    double lam = 2.0, rho = 8.0;
    auto band = [&](double center, double width) {
        GridFunction hat(g, 1);
        std::size_t idx = 0;
        for (int kx = 0; kx < g.n; ++kx)
            for (int ky = 0; ky < g.n; ++ky)
                for (int kz = 0; kz < g.n; ++kz, ++idx) {
                    double xi = std::sqrt(g.wavenumber(kx) * g.wavenumber(kx) +
                                          g.wavenumber(ky) * g.wavenumber(ky) +
                                          g.wavenumber(kz) * g.wavenumber(kz));
                    double d = (xi - center) / width;
                    hat[idx] = std::exp(-0.5 * d * d);
                }
        auto f = spectral_transform(hat, TransformDirection::inverse);
        f *= 1.0 / lp_norm(f, 2.0);
        return f;
    };
    auto jump_norm = [&](const GridFunction& f) {
        // int_{-rho}^{rho} e^{-i t lambda} e^{i t H0} f dt, mode-exact.
        GridFunction hat = spectral_transform(f, TransformDirection::forward);
        std::size_t idx = 0;
        for (int kx = 0; kx < g.n; ++kx)
            for (int ky = 0; ky < g.n; ++ky)
                for (int kz = 0; kz < g.n; ++kz, ++idx) {
                    double m = g.wavenumber(kx) * g.wavenumber(kx) +
                               g.wavenumber(ky) * g.wavenumber(ky) +
                               g.wavenumber(kz) * g.wavenumber(kz);
                    double d = m - lam;
                    double mult = std::abs(d) < 1e-12 ? 2.0 * rho : 2.0 * std::sin(rho * d) / d;
                    hat[idx] *= mult;
                }
        return lp_norm(spectral_transform(hat, TransformDirection::inverse), 2.0);
    };
    double on = jump_norm(band(std::sqrt(lam), 0.15));
    double off_low = jump_norm(band(0.0, 0.2));
    double off_high = jump_norm(band(2.0 * std::sqrt(lam), 0.2));
    CHECK(on > 10.0 * off_low);
    CHECK(on > 10.0 * off_high);
}

TEST_CASE("kernel symmetry: rotation by 90 degrees commutes with application")
{
    Grid3 g(16, 8.0);
    std::mt19937_64 rng(31);
    std::normal_distribution<double> dist;
    GridFunction f(g, 1);
    // Random data supported well inside the box.
    for (int ix = 4; ix < 12; ++ix)
        for (int iy = 4; iy < 12; ++iy)
            for (int iz = 4; iz < 12; ++iz)
                f[g.index(ix, iy, iz)] = complexd(dist(rng), dist(rng));

    auto rot = [&](const GridFunction& u) {
        // (x, y, z) -> (-y, x, z) about the grid center; index n-i mirrors -x.
        GridFunction out(g, 1);
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy)
                for (int iz = 0; iz < g.n; ++iz)
                    out[g.index((g.n - iy) % g.n, ix, iz)] = u[g.index(ix, iy, iz)];
        return out;
    };
    auto q = ResolventQuery::at(complexd(-1.5, 0.0));
    auto hs = HamiltonianSpec::scalar();
    auto a = apply_free_resolvent(rot(f), q, hs);
    auto b = rot(apply_free_resolvent(f, q, hs));
    double err = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        err = std::max(err, std::abs(a[i] - b[i]));
    CHECK(err < 1e-12 * lp_norm(f, kInf));
}

TEST_CASE("fourier_limit_check: decay in rho and kernel-convolution oracle")
{
    Grid3 g(48, 24.0);
    auto f = gaussian(g, 1.0);
    auto hs = HamiltonianSpec::scalar();
    complexd lam(1.0, -1.0);

    auto r8 = fourier_limit_check(f, lam, 8.0, hs);
    double scale = lorentz_norm(f, 6.0 / 5.0, 1.0);
    CHECK(r8.discrepancy < 1e-3 * scale);

    // Truncation error shrinks like e^{-rho} while it dominates, then the
    // discrepancy stabilizes at the quadrature floor: two-horizon checks.
    auto r2 = fourier_limit_check(f, lam, 2.0, hs);
    auto r4 = fourier_limit_check(f, lam, 4.0, hs);
    CHECK(r4.discrepancy < 0.25 * r2.discrepancy);
    auto r12 = fourier_limit_check(f, lam, 12.0, hs);
    CHECK(r12.discrepancy < 1.2 * r8.discrepancy + 1e-6 * scale);

    // Zero input gives zero on both sides.
    GridFunction zero(g, 1);
    auto rz = fourier_limit_check(zero, lam, 2.0, hs);
    CHECK(lp_norm(rz.lhs, 2.0) == 0.0);
    CHECK(lp_norm(rz.rhs, 2.0) == 0.0);

    // lambda = -1: the resolvent side against the closed-form kernel
    // convolution oracle (the undamped time integral converges only in the
    // averaged sense at real lambda, so the oracle targets the kernel side).
    Grid3 gs(32, 16.0);
    auto fs = gaussian(gs, 1.0);
    auto rm1 = fourier_limit_check(fs, complexd(-1.0, 0.0), 12.0, hs);
    {
        GridFunction conv(gs, 1);
        std::vector<std::array<double, 3>> pts(gs.point_count());
        std::size_t idx = 0;
        for (int ix = 0; ix < gs.n; ++ix)
            for (int iy = 0; iy < gs.n; ++iy)
                for (int iz = 0; iz < gs.n; ++iz, ++idx)
                    pts[idx] = gs.point(ix, iy, iz);
        // Sample the check at a few probe points only.
        std::vector<std::size_t> probes = {gs.index(16, 16, 16), gs.index(18, 15, 16),
                                           gs.index(12, 16, 20)};
        complexd diag = singular_cell_weight(osc_root(complexd(-1.0, 0.0), Branch::minus_i0),
                                             gs.spacing());
        for (std::size_t pi : probes) {
            complexd acc = diag * fs[pi];
            for (std::size_t j = 0; j < gs.point_count(); ++j) {
                double dx = gs.min_image(pts[pi][0] - pts[j][0]);
                double dy = gs.min_image(pts[pi][1] - pts[j][1]);
                double dz = gs.min_image(pts[pi][2] - pts[j][2]);
                double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (r == 0.0 || r > 0.5 * gs.box_length)
                    continue;
                acc += std::exp(-r) / (4.0 * M_PI * r) * fs[j];
            }
            acc *= gs.cell_volume();
            CHECK(std::abs(rm1.rhs[pi] - complexd(0, 1) * acc) < 1e-9 * lp_norm(fs, kInf));
        }
    }
    CHECK(std::isfinite(rm1.discrepancy));
}

TEST_CASE("singular-cell constants: Monte Carlo and lattice-sum validation")
{
    // Cell average of 1/|u| over the unit cube, seeded Monte Carlo.
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    double s = 0;
    const long M = 1000000;
    for (long m = 0; m < M; ++m) {
        double a = U(rng), b = U(rng), c = U(rng);
        s += 1.0 / std::sqrt(a * a + b * b + c * c);
    }
    CHECK(std::abs(s / M - kCellAverageUnit) < 3e-3);

    // Lattice correction via Ewald summation (independent derivation of the
    // sum-vs-integral defect of the punctured midpoint rule for 1/r).
    double alpha = 2.0;
    double real_sum = 0;
    const int R = 10;
    for (int i = -R; i <= R; ++i)
        for (int j = -R; j <= R; ++j)
            for (int k = -R; k <= R; ++k) {
                if (!i && !j && !k)
                    continue;
                double r = std::sqrt(static_cast<double>(i * i + j * j + k * k));
                real_sum += std::erfc(std::sqrt(alpha) * r) / r;
            }
    double recip_sum = 0;
    for (int i = -R; i <= R; ++i)
        for (int j = -R; j <= R; ++j)
            for (int k = -R; k <= R; ++k) {
                if (!i && !j && !k)
                    continue;
                double m2 = static_cast<double>(i * i + j * j + k * k);
                recip_sum += std::exp(-M_PI * M_PI * m2 / alpha) / (M_PI * m2);
            }
    double defect = -(real_sum + recip_sum - M_PI / alpha - 2.0 * std::sqrt(alpha / M_PI));
    CHECK(std::abs(defect - kLatticeCorrectionUnit) < 1e-6);
}

TEST_CASE("fourier_limit_check: two-sided branch jump for real lambda")
{
    Grid3 g(32, 16.0);
    auto f = gaussian(g, 1.0);
    auto hs = HamiltonianSpec::scalar();
    auto r = fourier_limit_check(f, complexd(1.5, 0.0), 8.0, hs);
    REQUIRE(r.has_two_sided);
    // The symmetrized integral approximates the branch jump; at finite rho
    // the agreement is at the few-percent level in the weak L^6 norm.
    CHECK(r.two_sided_discrepancy < 0.2 * lorentz_norm(f, 6.0 / 5.0, 1.0));
}
