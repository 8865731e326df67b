// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "speclab/grid.hpp"
#include "speclab/scenario.hpp"

using namespace speclab;

namespace {

GridFunction random_function(const Grid3& g, int comps, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    GridFunction f(g, comps);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = complexd(dist(rng), dist(rng));
    return f;
}

std::string minimal_scalar_text()
{
    return "[scenario]\nformat 1\nseed 7\n"
           "[grid]\nn 32\nL 16\n"
           "[hamiltonian]\nkind scalar\n"
           "[potential]\nkind ball\nradius 1\namplitude -3\n";
}

} // namespace

TEST_CASE("spectral transform: DC mass and round trip")
{
    Grid3 g(16, 8.0);
    GridFunction one(g, 1);
    for (std::size_t i = 0; i < one.size(); ++i)
        one[i] = 1.0;
    auto hat = spectral_transform(one, TransformDirection::forward);
    // Constant function concentrates at mode zero; the weighted L2 mass of
    // the delta is L^(3/2).
    CHECK(lp_norm(hat, 2.0) == doctest::Approx(std::pow(8.0, 1.5)).epsilon(1e-12));
    double off = 0;
    for (std::size_t i = 1; i < hat.size(); ++i)
        off = std::max(off, std::abs(hat[i]));
    CHECK(off < 1e-10 * std::abs(hat[0]));

    auto f = random_function(g, 1, 11);
    auto back = spectral_transform(spectral_transform(f, TransformDirection::forward),
                                   TransformDirection::inverse);
    double sup = lp_norm(f, std::numeric_limits<double>::infinity());
    double err = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        err = std::max(err, std::abs(back[i] - f[i]));
    CHECK(err < 1e-12 * sup);
}

TEST_CASE("spectral transform: plane wave lands on a single mode")
{
    // Direct-summation oracle on an 8^3 grid.
    Grid3 g(8, 4.0);
    GridFunction f(g, 1);
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx)
                f[idx] = std::exp(complexd(0, 2.0 * M_PI * g.coord(ix) / g.box_length));
    auto hat = spectral_transform(f, TransformDirection::forward);

    // Oracle: brute-force DFT sum for every mode.
    double max_err = 0;
    for (int kx = 0; kx < g.n; ++kx)
        for (int ky = 0; ky < g.n; ++ky)
            for (int kz = 0; kz < g.n; ++kz) {
                complexd acc(0, 0);
                std::size_t j = 0;
                for (int ix = 0; ix < g.n; ++ix)
                    for (int iy = 0; iy < g.n; ++iy)
                        for (int iz = 0; iz < g.n; ++iz, ++j) {
                            double phase = g.wavenumber(kx) * g.coord(ix) +
                                           g.wavenumber(ky) * g.coord(iy) +
                                           g.wavenumber(kz) * g.coord(iz);
                            acc += f[j] * std::exp(complexd(0, -phase));
                        }
                acc /= std::pow(static_cast<double>(g.n), 1.5);
                max_err = std::max(max_err, std::abs(acc - hat[g.index(kx, ky, kz)]));
            }
    CHECK(max_err < 1e-9);

    // Single nonzero coefficient at signed mode (1, 0, 0).
    for (int kx = 0; kx < g.n; ++kx)
        for (int ky = 0; ky < g.n; ++ky)
            for (int kz = 0; kz < g.n; ++kz) {
                double a = std::abs(hat[g.index(kx, ky, kz)]);
                if (g.signed_mode(kx) == 1 && ky == 0 && kz == 0)
                    CHECK(a > 1.0);
                else
                    CHECK(a < 1e-9);
            }
}

TEST_CASE("Parseval holds in the weighted norms")
{
    Grid3 g(16, 5.0);
    for (int comps : {1, 2}) {
        auto f = random_function(g, comps, 23 + comps);
        auto hat = spectral_transform(f, TransformDirection::forward);
        CHECK(lp_norm(hat, 2.0) == doctest::Approx(lp_norm(f, 2.0)).epsilon(1e-12));
    }
}

TEST_CASE("lp_norm: closed forms and p-th power additivity")
{
    Grid3 g(16, 8.0);
    double h = g.spacing();

    GridFunction cell(g, 1);
    cell[g.index(3, 4, 5)] = 1.0;
    for (double p : {1.0, 1.5, 2.0, 6.0})
        CHECK(lp_norm(cell, p) == doctest::Approx(std::pow(h, 3.0 / p)).epsilon(1e-13));
    CHECK(lp_norm(cell, std::numeric_limits<double>::infinity()) == doctest::Approx(1.0));

    GridFunction zero(g, 1);
    CHECK(lp_norm(zero, 2.0) == 0.0);
    CHECK_THROWS(lp_norm(zero, 0.5));

    // Ball indicator, p = 1: volume within one-cell surface error.
    GridFunction ball(g, 1);
    std::size_t idx = 0;
    long cells = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx) {
                auto pt = g.point(ix, iy, iz);
                if (pt[0] * pt[0] + pt[1] * pt[1] + pt[2] * pt[2] < 1.0) {
                    ball[idx] = 1.0;
                    ++cells;
                }
            }
    double vol_oracle = static_cast<double>(cells) * g.cell_volume(); // cell-counting oracle
    CHECK(lp_norm(ball, 1.0) == doctest::Approx(vol_oracle).epsilon(1e-13));
    CHECK(std::abs(vol_oracle - 4.0 * M_PI / 3.0) < 4.0 * M_PI * h);

    // p-th power additivity for disjointly supported pieces.
    GridFunction a = random_function(g, 1, 5), b(g, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i % 2 == 0) {
            b[i] = a[i];
            a[i] = 0;
        }
    }
    GridFunction sum = a + b;
    for (double p : {1.0, 2.0, 3.0}) {
        double lhs = std::pow(lp_norm(sum, p), p);
        double rhs = std::pow(lp_norm(a, p), p) + std::pow(lp_norm(b, p), p);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("scenario: parse, validate, round trip")
{
    Scenario s = parse_scenario(minimal_scalar_text(), ".");
    CHECK(s.grid.point_count() == 32768);
    CHECK(s.hamiltonian.kind == HamiltonianKind::scalar);
    long support = 0, interior = 0;
    for (std::size_t i = 0; i < s.v.size(); ++i)
        if (s.v[i] != complexd(0, 0)) {
            ++support;
            // Interior cells carry the full depth; boundary cells the
            // covered fraction of it.
            CHECK(s.v[i].real() >= -3.0);
            CHECK(s.v[i].real() < 0.0);
            if (s.v[i].real() == -3.0)
                ++interior;
        }
    CHECK(support > 0);
    CHECK(interior > 0);
    // Cell-averaged realization keeps the integral of V near the exact one.
    CHECK(lp_norm(s.v, 1.0) == doctest::Approx(3.0 * 4.0 * M_PI / 3.0).epsilon(1e-2));

    // Emit/parse is bit-exact.
    std::string text = emit_scenario(s);
    Scenario s2 = parse_scenario(text, ".");
    CHECK(emit_scenario(s2) == text);
    CHECK(s2.grid == s.grid);
    for (std::size_t i = 0; i < s.v.size(); ++i)
        CHECK(s2.v[i] == s.v[i]);

    // Matrix scenario missing the gap.
    std::string bad = "[scenario]\nformat 1\n[grid]\nn 16\nL 16\n"
                      "[hamiltonian]\nkind matrix\n"
                      "[potential.w1]\nkind ball\nradius 1\namplitude 2\n"
                      "[potential.w2]\nkind ball\nradius 1\namplitude 1\n";
    CHECK_THROWS_WITH_AS(parse_scenario(bad, "."), doctest::Contains("matrix case requires gap"),
                         std::runtime_error);

    // Support margin violation: ball radius 5 in a box of side 16.
    std::string margin = "[scenario]\nformat 1\n[grid]\nn 16\nL 16\n"
                         "[hamiltonian]\nkind scalar\n"
                         "[potential]\nkind ball\nradius 5\namplitude -1\n";
    CHECK_THROWS_WITH_AS(parse_scenario(margin, "."), doctest::Contains("margin"),
                         std::runtime_error);
}

TEST_CASE("sample files round trip through the raw format")
{
    Grid3 g(8, 4.0);
    auto f = random_function(g, 2, 99);
    // Round to float32 so the round trip is exact.
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = complexd(static_cast<float>(f[i].real()), static_cast<float>(f[i].imag()));
    std::string path = "test_samples.cbin";
    write_samples_file(path, f);
    auto back = read_samples_file(path, g);
    REQUIRE(back.components() == 2);
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(back[i] == f[i]);
    std::remove(path.c_str());
}

TEST_CASE("boundary mass fraction")
{
    Grid3 g(16, 16.0);
    GridFunction center(g, 1);
    center[g.index(8, 8, 8)] = 1.0;
    CHECK(boundary_mass_fraction(center) == 0.0);
    GridFunction edge(g, 1);
    edge[g.index(0, 8, 8)] = 1.0;
    CHECK(boundary_mass_fraction(edge) == 1.0);
}
