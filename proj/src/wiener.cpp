// SPDX-License-Identifier: Apache-2.0

#include "speclab/wiener.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>
#include <string>

namespace speclab {

namespace {

using complexd = std::complex<double>;

void check_shape(const TimeKernel& a)
{
    if (a.m <= 0 || a.d <= 0 || !(a.tau > 0) || static_cast<int>(a.blocks.size()) != a.m)
        throw std::invalid_argument("time kernel: malformed shape");
}

void check_match(const TimeKernel& a, const TimeKernel& b)
{
    if (a.m != b.m || a.d != b.d || a.tau != b.tau)
        throw std::invalid_argument("time kernel: shape mismatch");
}

double op_norm(const WMatrix& m)
{
    Eigen::JacobiSVD<WMatrix> svd(m);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double sigma_min(const WMatrix& m)
{
    Eigen::JacobiSVD<WMatrix> svd(m);
    auto s = svd.singularValues();
    return s.size() ? s(s.size() - 1) : 0.0;
}

// Smooth bump profile exp(-1/(1-x^2)) on (-1, 1).
double bump(double x)
{
    double a = std::abs(x);
    if (a >= 1.0)
        return 0.0;
    return std::exp(-1.0 / (1.0 - a * a));
}

// Smooth step: 1 for t <= 0, 0 for t >= 1, built from e^{-1/x} halves.
double smooth_step_down(double t)
{
    if (t <= 0.0)
        return 1.0;
    if (t >= 1.0)
        return 0.0;
    auto half = [](double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; };
    return half(1.0 - t) / (half(1.0 - t) + half(t));
}

double circle_dist(double a, double b)
{
    double d = std::fmod(std::abs(a - b), 2.0 * M_PI);
    return std::min(d, 2.0 * M_PI - d);
}

// Inverse transform of symbol samples back to blocks.
std::vector<WMatrix> blocks_from_symbol(const std::vector<WMatrix>& sym, int m, double tau, int d)
{
    std::vector<WMatrix> out(m, WMatrix::Zero(d, d));
    for (int k = 0; k < m; ++k) {
        WMatrix acc = WMatrix::Zero(d, d);
        for (int j = 0; j < m; ++j) {
            double lam = 2.0 * M_PI * j / (m * tau);
            acc += std::polar(1.0, tau * k * lam) * sym[j];
        }
        out[k] = acc / (static_cast<double>(m) * tau);
    }
    return out;
}

} // namespace

TimeKernel TimeKernel::zero(int m, double tau, int d)
{
    TimeKernel k;
    k.m = m;
    k.tau = tau;
    k.d = d;
    k.blocks.assign(m, WMatrix::Zero(d, d));
    return k;
}

TimeKernel TimeKernel::identity(int m, double tau, int d)
{
    TimeKernel k = zero(m, tau, d);
    k.has_identity = true;
    return k;
}

double TimeKernel::mass_norm() const
{
    double s = 0;
    for (const auto& b : blocks)
        s += op_norm(b) * tau;
    return s;
}

TimeKernel TimeKernel::adjoint() const
{
    TimeKernel out = *this;
    for (int k = 0; k < m; ++k)
        out.blocks[(m - k) % m] = blocks[k].adjoint();
    return out;
}

TimeKernel convolve(const TimeKernel& a, const TimeKernel& b)
{
    check_shape(a);
    check_shape(b);
    check_match(a, b);
    TimeKernel out = TimeKernel::zero(a.m, a.tau, a.d);
    out.has_identity = a.has_identity && b.has_identity;
    for (int k = 0; k < a.m; ++k) {
        WMatrix acc = WMatrix::Zero(a.d, a.d);
        for (int j = 0; j < a.m; ++j)
            acc += a.blocks[j] * b.blocks[((k - j) % a.m + a.m) % a.m];
        out.blocks[k] = acc * a.tau;
        if (a.has_identity)
            out.blocks[k] += b.blocks[k];
        if (b.has_identity)
            out.blocks[k] += a.blocks[k];
    }
    return out;
}

SymbolFamily symbol(const TimeKernel& a)
{
    check_shape(a);
    SymbolFamily s;
    s.tau = a.tau;
    s.lambdas.resize(a.m);
    s.values.resize(a.m);
    for (int j = 0; j < a.m; ++j) {
        double lam = 2.0 * M_PI * j / (a.m * a.tau);
        s.lambdas[j] = lam;
        WMatrix acc = a.has_identity ? WMatrix::Identity(a.d, a.d).eval()
                                     : WMatrix::Zero(a.d, a.d).eval();
        for (int k = 0; k < a.m; ++k)
            acc += std::polar(1.0, -a.tau * k * lam) * a.blocks[k] * a.tau;
        s.values[j] = acc;
    }
    return s;
}

TimeKernel invert(const TimeKernel& a, double cond_limit)
{
    check_shape(a);
    if (!a.has_identity)
        throw std::invalid_argument("invert: kernel must carry the identity (a = I + L)");
    SymbolFamily s = symbol(a);
    std::vector<WMatrix> inv_sym(a.m);
    for (int j = 0; j < a.m; ++j) {
        Eigen::JacobiSVD<WMatrix> svd(s.values[j], Eigen::ComputeFullU | Eigen::ComputeFullV);
        double smax = svd.singularValues()(0);
        double smin = svd.singularValues()(svd.singularValues().size() - 1);
        if (!(smin > 0) || smax / smin > cond_limit)
            throw std::runtime_error("invert: singular symbol at frequency index " +
                                     std::to_string(j));
        inv_sym[j] = s.values[j].inverse() - WMatrix::Identity(a.d, a.d);
    }
    TimeKernel out = TimeKernel::identity(a.m, a.tau, a.d);
    out.blocks = blocks_from_symbol(inv_sym, a.m, a.tau, a.d);
    return out;
}

TimeKernel invert_by_localization(const TimeKernel& a, int cover_count)
{
    check_shape(a);
    if (!a.has_identity)
        throw std::invalid_argument("invert_by_localization: kernel must carry the identity");
    if (cover_count < 1)
        throw std::invalid_argument("invert_by_localization: cover_count must be positive");
    const int m = a.m, d = a.d, P = cover_count;

    SymbolFamily s = symbol(a);
    // Arc centers and widths on the frequency circle theta = tau lambda.
    const double w_chi = 1.2 * M_PI / P;  // partition bump half-width
    const double w_in = w_chi;            // plateau of the piece cutoff
    const double w_out = std::min(2.2 * M_PI / P, M_PI);

    std::vector<WMatrix> glued(m, WMatrix::Zero(d, d));
    for (int j = 0; j < m; ++j) {
        double theta = 2.0 * M_PI * j / m;
        // Partition of unity at this frequency.
        std::vector<double> chi(P);
        double total = 0;
        for (int p = 0; p < P; ++p) {
            double center = 2.0 * M_PI * p / P;
            chi[p] = bump(circle_dist(theta, center) / w_chi);
            total += chi[p];
        }
        if (!(total > 0))
            throw std::runtime_error("invert_by_localization: cover has a gap");
        WMatrix acc = WMatrix::Zero(d, d);
        for (int p = 0; p < P; ++p) {
            if (chi[p] == 0.0)
                continue;
            double center = 2.0 * M_PI * p / P;
            double dist = circle_dist(theta, center);
            double c = smooth_step_down((dist - w_in) / (w_out - w_in));
            // Localized piece: identity off the arc, the true symbol on it.
            WMatrix piece = WMatrix::Identity(d, d) +
                            c * (s.values[j] - WMatrix::Identity(d, d));
            double smin = sigma_min(piece);
            if (!(smin > 1e-10))
                throw std::runtime_error(
                    "invert_by_localization: piece not invertible; use a finer cover");
            acc += (chi[p] / total) * (piece.inverse() - WMatrix::Identity(d, d));
        }
        glued[j] = acc;
    }
    TimeKernel out = TimeKernel::identity(m, a.tau, d);
    out.blocks = blocks_from_symbol(glued, m, a.tau, d);
    return out;
}

CausalityReport causality_check(const TimeKernel& a, int window)
{
    check_shape(a);
    if (window < 0)
        window = a.m / 2;
    CausalityReport rep;

    double scale = 0;
    for (const auto& b : a.blocks)
        scale = std::max(scale, b.cwiseAbs().maxCoeff());
    scale = std::max(scale, 1.0);
    rep.is_causal = true;
    for (int k = window; k < a.m; ++k)
        if (a.blocks[k].cwiseAbs().maxCoeff() > 1e-12 * scale)
            rep.is_causal = false;

    // Lower-half-plane symbol samples: A(lambda - i eta) with the damping
    // e^{-tau k eta} acting slot by slot; only meaningful for causal a.
    rep.symbol_lower_min = std::numeric_limits<double>::infinity();
    for (int ie = 0; ie <= 20; ++ie) {
        double eta = 2.0 * ie / 20.0;
        for (int j = 0; j < a.m; ++j) {
            double lam = 2.0 * M_PI * j / (a.m * a.tau);
            WMatrix acc = a.has_identity ? WMatrix::Identity(a.d, a.d).eval()
                                         : WMatrix::Zero(a.d, a.d).eval();
            for (int k = 0; k < window; ++k)
                acc += std::polar(1.0, -a.tau * k * lam) * std::exp(-a.tau * k * eta) *
                       a.blocks[k] * a.tau;
            double smin = sigma_min(acc);
            if (smin < rep.symbol_lower_min) {
                rep.symbol_lower_min = smin;
                if (smin < 1e-3) {
                    rep.has_offender = true;
                    rep.offending_lambda = complexd(lam, -eta);
                }
            }
        }
    }

    TimeKernel inv = invert(a);
    rep.guard_mass = 0;
    for (int k = window; k < a.m; ++k)
        rep.guard_mass += op_norm(inv.blocks[k]) * a.tau;
    bool guard_ok = rep.guard_mass <= 1e-9 * std::max(1.0, inv.mass_norm());
    rep.inverse_causal = guard_ok && !rep.has_offender;
    return rep;
}

} // namespace speclab
