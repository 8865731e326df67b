// SPDX-License-Identifier: Apache-2.0

#include "speclab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "speclab/fft.hpp"

namespace speclab {

namespace {

// Even and 5-smooth: power-of-two sizes plus the 48/96-style sizes the
// resolvent checks run at, all fast under FFTW.
bool is_fft_size(int n)
{
    if (n < 4 || n % 2 != 0)
        return false;
    for (int f : {2, 3, 5})
        while (n % f == 0)
            n /= f;
    return n == 1;
}

} // namespace

Grid3::Grid3(int n_per_axis, double L) : n(n_per_axis), box_length(L)
{
    if (!is_fft_size(n))
        throw std::invalid_argument("grid: n per axis must be an even 2/3/5-smooth size");
    if (!(L > 0.0))
        throw std::invalid_argument("grid: box length must be positive");
}

double Grid3::min_image(double d) const
{
    double L = box_length;
    d = std::remainder(d, L);
    if (d >= 0.5 * L)
        d -= L;
    if (d < -0.5 * L)
        d += L;
    return d;
}

GridFunction::GridFunction(const Grid3& grid, int components)
    : grid_(grid), components_(components),
      values_(static_cast<std::size_t>(components) * grid.point_count(), complexd(0.0, 0.0))
{
    if (components != 1 && components != 2)
        throw std::invalid_argument("grid function: component count must be 1 or 2");
}

double GridFunction::point_modulus(std::size_t point_idx) const
{
    if (components_ == 1)
        return std::abs(values_[point_idx]);
    double a = std::norm(at(0, point_idx));
    double b = std::norm(at(1, point_idx));
    return std::sqrt(a + b);
}

bool GridFunction::all_finite() const
{
    for (const auto& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            return false;
    return true;
}

GridFunction& GridFunction::operator+=(const GridFunction& o)
{
    if (o.size() != size())
        throw std::invalid_argument("grid function: shape mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] += o.values_[i];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o)
{
    if (o.size() != size())
        throw std::invalid_argument("grid function: shape mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] -= o.values_[i];
    return *this;
}

GridFunction& GridFunction::operator*=(complexd s)
{
    for (auto& v : values_)
        v *= s;
    return *this;
}

GridFunction spectral_transform(const GridFunction& f, TransformDirection dir)
{
    const Grid3& g = f.grid();
    const int n = g.n;
    const std::size_t npts = g.point_count();
    GridFunction out = f;

    // Phase factors absorbing the -L/2 coordinate offset so that modes are
    // referenced to physical positions: e^{-i xi x} = e^{-2 pi i k j / n} * (-1)^(k1+k2+k3).
    // Symmetric n^(-3/2) scaling keeps the transform unitary in the
    // h^3-weighted norms; a constant maps to a mode-zero delta whose
    // weighted L2 mass is L^(3/2).
    const double fwd_scale = 1.0 / std::pow(static_cast<double>(n), 1.5);
    const double inv_scale = fwd_scale;

    for (int c = 0; c < f.components(); ++c) {
        complexd* data = out.component_data(c);
        if (dir == TransformDirection::forward) {
            fft::transform3d(data, n, -1);
            std::size_t idx = 0;
            for (int kx = 0; kx < n; ++kx)
                for (int ky = 0; ky < n; ++ky)
                    for (int kz = 0; kz < n; ++kz, ++idx) {
                        int parity = (g.signed_mode(kx) + g.signed_mode(ky) + g.signed_mode(kz)) & 1;
                        double s = parity ? -fwd_scale : fwd_scale;
                        data[idx] *= s;
                    }
        } else {
            std::size_t idx = 0;
            for (int kx = 0; kx < n; ++kx)
                for (int ky = 0; ky < n; ++ky)
                    for (int kz = 0; kz < n; ++kz, ++idx) {
                        int parity = (g.signed_mode(kx) + g.signed_mode(ky) + g.signed_mode(kz)) & 1;
                        if (parity)
                            data[idx] = -data[idx];
                    }
            fft::transform3d(data, n, +1);
            for (std::size_t i = 0; i < npts; ++i)
                data[i] *= inv_scale;
        }
    }
    return out;
}

double lp_norm(const GridFunction& f, double p)
{
    if (p < 1.0)
        throw std::invalid_argument("lp_norm: p must be >= 1");
    const std::size_t npts = f.grid().point_count();
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < npts; ++i)
            m = std::max(m, f.point_modulus(i));
        return m;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < npts; ++i)
        sum += std::pow(f.point_modulus(i), p);
    return std::pow(sum * f.grid().cell_volume(), 1.0 / p);
}

complexd inner_product(const GridFunction& f, const GridFunction& g)
{
    if (f.size() != g.size())
        throw std::invalid_argument("inner_product: shape mismatch");
    complexd acc(0.0, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i)
        acc += f[i] * std::conj(g[i]);
    return acc * f.grid().cell_volume();
}

double boundary_mass_fraction(const GridFunction& f)
{
    const Grid3& g = f.grid();
    const int n = g.n;
    const double shell = 2.0 * g.spacing();
    const double edge = 0.5 * g.box_length - shell;
    double total = 0.0, near = 0.0;
    std::size_t idx = 0;
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            for (int iz = 0; iz < n; ++iz, ++idx) {
                double m2 = 0.0;
                for (int c = 0; c < f.components(); ++c)
                    m2 += std::norm(f.at(c, idx));
                total += m2;
                if (std::abs(g.coord(ix)) >= edge || std::abs(g.coord(iy)) >= edge ||
                    std::abs(g.coord(iz)) >= edge)
                    near += m2;
            }
    return total > 0.0 ? near / total : 0.0;
}

} // namespace speclab
