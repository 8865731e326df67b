// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "speclab/wiener.hpp"

using namespace speclab;
using complexd = std::complex<double>;

namespace {

TimeKernel random_kernel(int m, double tau, int d, std::uint64_t seed, double scale,
                         bool with_identity)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    TimeKernel k = with_identity ? TimeKernel::identity(m, tau, d) : TimeKernel::zero(m, tau, d);
    for (auto& b : k.blocks)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                b(i, j) = scale * complexd(dist(rng), dist(rng));
    return k;
}

double max_block_diff(const TimeKernel& a, const TimeKernel& b)
{
    double e = 0;
    for (int k = 0; k < a.m; ++k)
        e = std::max(e, (a.blocks[k] - b.blocks[k]).cwiseAbs().maxCoeff());
    return e;
}

} // namespace

TEST_CASE("convolve: identity, group law of deltas, submultiplicativity")
{
    auto b = random_kernel(8, 0.5, 2, 3, 0.4, false);
    auto I = TimeKernel::identity(8, 0.5, 2);
    auto ib = convolve(I, b);
    CHECK(max_block_diff(ib, b) == 0.0);
    CHECK(!ib.has_identity);

    // delta at slot 1 convolved with delta at slot 2 = delta at slot 3,
    // with the tau scaling of the convolution.
    auto d1 = TimeKernel::zero(8, 0.5, 1), d2 = d1;
    d1.blocks[1](0, 0) = 1.0;
    d2.blocks[2](0, 0) = 1.0;
    auto d3 = convolve(d1, d2);
    for (int k = 0; k < 8; ++k)
        CHECK(std::abs(d3.blocks[k](0, 0) - (k == 3 ? complexd(0.5, 0) : complexd(0, 0))) == 0.0);

    for (std::uint64_t seed : {10u, 11u, 12u}) {
        auto x = random_kernel(16, 0.25, 2, seed, 0.7, false);
        auto y = random_kernel(16, 0.25, 2, seed + 100, 0.7, false);
        CHECK(convolve(x, y).mass_norm() <= x.mass_norm() * y.mass_norm() + 1e-12);
    }
}

TEST_CASE("symbol: identity, convolution to product, two-slot hand value")
{
    auto I = TimeKernel::identity(4, 0.3, 3);
    auto sI = symbol(I);
    for (const auto& v : sI.values)
        CHECK((v - WMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);

    auto x = random_kernel(8, 0.5, 2, 21, 0.6, true);
    auto y = random_kernel(8, 0.5, 2, 22, 0.6, true);
    auto sxy = symbol(convolve(x, y));
    auto sx = symbol(x), sy = symbol(y);
    for (int j = 0; j < 8; ++j)
        CHECK((sxy.values[j] - sx.values[j] * sy.values[j]).cwiseAbs().maxCoeff() < 1e-12);

    // d = 1, m = 2, tau = 1, L = 0.5 at slot 1, identity carried:
    // A(0) = 1.5 and A(pi) = 0.5.
    auto a = TimeKernel::identity(2, 1.0, 1);
    a.blocks[1](0, 0) = 0.5;
    auto sa = symbol(a);
    CHECK(sa.lambdas[1] == doctest::Approx(M_PI));
    CHECK(std::abs(sa.values[0](0, 0) - complexd(1.5, 0)) < 1e-15);
    CHECK(std::abs(sa.values[1](0, 0) - complexd(0.5, 0)) < 1e-15);

    // Integration property: summing the blocks gives the zero-frequency
    // symbol exactly.
    auto pure = random_kernel(8, 0.5, 2, 31, 0.9, false);
    WMatrix sum = WMatrix::Zero(2, 2);
    for (const auto& b : pure.blocks)
        sum += b * pure.tau;
    CHECK((sum - symbol(pure).values[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invert: trivial, hand-derived two-slot inverse, circulant oracle")
{
    auto I = TimeKernel::identity(8, 0.25, 2);
    auto invI = invert(I);
    CHECK(invI.has_identity);
    CHECK(invI.mass_norm() < 1e-14);

    // m = 2, tau = 1, L = 0.5 at slot 1: inverse blocks 1/3 and -2/3.
    auto a = TimeKernel::identity(2, 1.0, 1);
    a.blocks[1](0, 0) = 0.5;
    auto b = invert(a);
    CHECK(std::abs(b.blocks[0](0, 0) - complexd(1.0 / 3.0, 0)) < 1e-12);
    CHECK(std::abs(b.blocks[1](0, 0) + complexd(2.0 / 3.0, 0)) < 1e-12);
    auto round = convolve(a, b);
    CHECK(round.has_identity);
    CHECK(round.mass_norm() < 1e-12);

    // Dense block-circulant solve oracle: (I + L) * (I + B) = I turns into
    // the linear system C vec(B) = -vec(L) with C the circulant action.
    const int m = 16, d = 4;
    auto k = random_kernel(m, 0.5, d, 77, 0.05, true);
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(m * d, m * d);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            WMatrix blk = k.blocks[((i - j) % m + m) % m] * k.tau;
            if (i == j)
                blk += WMatrix::Identity(d, d);
            C.block(i * d, j * d, d, d) = blk;
        }
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(m * d, d);
    for (int i = 0; i < m; ++i)
        rhs.block(i * d, 0, d, d) = -k.blocks[i];
    Eigen::MatrixXcd sol = C.partialPivLu().solve(rhs);
    auto inv = invert(k);
    double err = 0;
    for (int i = 0; i < m; ++i)
        err = std::max(err, (inv.blocks[i] - sol.block(i * d, 0, d, d)).cwiseAbs().maxCoeff());
    CHECK(err < 1e-10);

    // Singular symbol is reported with its frequency index.
    auto sing = TimeKernel::identity(4, 1.0, 1);
    sing.blocks[1](0, 0) = -1.0; // symbol vanishes at frequency 0
    CHECK_THROWS_WITH_AS(invert(sing), doctest::Contains("frequency index"), std::runtime_error);
}

TEST_CASE("invert round-trips convolve on conditioned random kernels")
{
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        auto k = random_kernel(16, 0.5, 3, seed, 0.08, true);
        auto inv = invert(k);
        auto round = convolve(k, inv);
        CHECK(round.has_identity);
        CHECK(round.mass_norm() < 1e-10);
    }
}

TEST_CASE("invert_by_localization agrees with direct inversion")
{
    auto I = TimeKernel::identity(8, 0.5, 2);
    for (int cover : {1, 2, 5}) {
        auto inv = invert_by_localization(I, cover);
        CHECK(inv.mass_norm() < 1e-12);
    }

    auto a = TimeKernel::identity(2, 1.0, 1);
    a.blocks[1](0, 0) = 0.5;
    auto loc = invert_by_localization(a, 2);
    auto dir = invert(a);
    CHECK(max_block_diff(loc, dir) < 1e-10);

    auto k = random_kernel(32, 0.25, 2, 55, 0.06, true);
    auto lk = invert_by_localization(k, 4);
    auto dk = invert(k);
    CHECK(max_block_diff(lk, dk) < 1e-8);
}

TEST_CASE("causality: Neumann inverse, anti-causal rejection, symbol zero")
{
    // Causal, small: L(t_k) = 0.3 e^{-k tau} on the first half. The guard
    // band must out-last the inverse's own e^{-t} tail, hence the deep m.
    const int m = 64;
    const double tau = 1.0;
    auto a = TimeKernel::identity(m, tau, 1);
    for (int k = 1; k < m / 2; ++k)
        a.blocks[k](0, 0) = 0.3 * std::exp(-static_cast<double>(k) * tau);
    auto rep = causality_check(a);
    CHECK(rep.is_causal);
    CHECK(rep.inverse_causal);
    CHECK(!rep.has_offender);

    // Truncated Neumann series oracle with line (non-cyclic) convolutions.
    std::vector<complexd> L(m, 0.0), term(m, 0.0), series(m, 0.0);
    for (int k = 1; k < m / 2; ++k)
        L[k] = a.blocks[k](0, 0);
    term = L;
    for (int n = 1; n <= 40; ++n) {
        for (int k = 0; k < m; ++k)
            series[k] += (n % 2 ? -1.0 : 1.0) * term[k];
        std::vector<complexd> next(m, 0.0);
        for (int k = 0; k < m; ++k)
            for (int j = 0; j <= k; ++j)
                next[k] += term[j] * L[k - j] * tau;
        term = next;
    }
    auto inv = invert(a);
    for (int k = 0; k < m / 2; ++k)
        CHECK(std::abs(inv.blocks[k](0, 0) - series[k]) < 1e-9);

    // Anti-causal kernel: mass in the guard band.
    auto anti = TimeKernel::identity(m, tau, 1);
    anti.blocks[m - 2](0, 0) = 0.4;
    CHECK(!causality_check(anti).is_causal);

    // Causal kernel whose symbol vanishes at lambda = pi / tau - 0.5 i:
    // beta e^{-i tau lambda} = -1 at that point for beta = e^{1/2}.
    auto bad = TimeKernel::identity(m, tau, 1);
    bad.blocks[1](0, 0) = std::exp(0.5);
    auto brep = causality_check(bad);
    CHECK(brep.is_causal);
    CHECK(brep.has_offender);
    CHECK(!brep.inverse_causal);
    CHECK(std::abs(brep.offending_lambda - complexd(M_PI, -0.5)) < 1e-9);
    CHECK(brep.symbol_lower_min < 1e-9);
}

TEST_CASE("mass-norm modulation bound and adjoint symmetry")
{
    auto k = random_kernel(16, 0.5, 2, 91, 0.8, false);
    // Multiplying blocks by a bounded scalar sequence scales the mass norm
    // by at most sup |f|, exactly for the extremal constant sequence.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    TimeKernel fk = k;
    double sup = 0;
    for (int j = 0; j < k.m; ++j) {
        double f = u(rng);
        sup = std::max(sup, std::abs(f));
        fk.blocks[j] *= f;
    }
    CHECK(fk.mass_norm() <= sup * k.mass_norm() * (1 + 1e-14));

    auto adj = k.adjoint();
    auto sa = symbol(adj), sk = symbol(k);
    // The adjoint's symbol is the adjoint of the symbol at matching
    // frequencies: hat(k*)(lambda_j) = hat(k)(lambda_j)^*.
    for (int j = 0; j < k.m; ++j)
        CHECK((sa.values[j] - sk.values[j].adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}
