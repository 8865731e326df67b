// SPDX-License-Identifier: Apache-2.0

#ifndef SPECLAB_GRID_HPP
#define SPECLAB_GRID_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace speclab {

using complexd = std::complex<double>;

/// Periodized uniform grid on [-L/2, L/2)^3, z index fastest.
/// Points are x_i = -L/2 + i*h with h = L/n; the quadrature weight per
/// cell is h^3 and wavenumbers are xi = 2*pi*k/L with k in [-n/2, n/2).
struct Grid3 {
    int n = 0;
    double box_length = 0.0;

    Grid3() = default;
    Grid3(int n_per_axis, double L);

    double spacing() const { return box_length / n; }
    double cell_volume() const { double h = spacing(); return h * h * h; }
    std::size_t point_count() const
    {
        return static_cast<std::size_t>(n) * n * n;
    }
    std::size_t index(int ix, int iy, int iz) const
    {
        return (static_cast<std::size_t>(ix) * n + iy) * n + iz;
    }
    double coord(int i) const { return -0.5 * box_length + i * spacing(); }
    std::array<double, 3> point(int ix, int iy, int iz) const
    {
        return {coord(ix), coord(iy), coord(iz)};
    }
    /// Signed mode number for axis index k in [0, n).
    int signed_mode(int k) const { return k < n / 2 ? k : k - n; }
    double wavenumber(int k) const
    {
        return 2.0 * M_PI * signed_mode(k) / box_length;
    }
    /// Displacement component folded to [-L/2, L/2).
    double min_image(double d) const;

    bool operator==(const Grid3&) const = default;
};

/// Complex-valued samples on a Grid3, with 1 (scalar) or 2 (matrix system)
/// components. Component c of point (ix,iy,iz) lives at c*n^3 + index.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(const Grid3& grid, int components);

    const Grid3& grid() const { return grid_; }
    int components() const { return components_; }
    std::size_t size() const { return values_.size(); }

    complexd& operator[](std::size_t i) { return values_[i]; }
    const complexd& operator[](std::size_t i) const { return values_[i]; }
    complexd& at(int c, std::size_t point_idx)
    {
        return values_[static_cast<std::size_t>(c) * grid_.point_count() + point_idx];
    }
    const complexd& at(int c, std::size_t point_idx) const
    {
        return values_[static_cast<std::size_t>(c) * grid_.point_count() + point_idx];
    }
    complexd* component_data(int c)
    {
        return values_.data() + static_cast<std::size_t>(c) * grid_.point_count();
    }
    const complexd* component_data(int c) const
    {
        return values_.data() + static_cast<std::size_t>(c) * grid_.point_count();
    }

    /// Euclidean modulus of the component vector at one grid point.
    double point_modulus(std::size_t point_idx) const;

    bool all_finite() const;

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(complexd s);
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(complexd s, GridFunction a) { return a *= s; }

private:
    Grid3 grid_;
    int components_ = 1;
    std::vector<complexd> values_;
};

enum class TransformDirection { forward, inverse };

/// Unitary DFT with physical wavenumbers: the transform of the constant
/// function 1 is a delta at mode zero of mass L^(3/2), and Parseval holds
/// exactly in the h^3-weighted L2 norms. Inverse composed with forward is
/// the identity to roundoff.
GridFunction spectral_transform(const GridFunction& f, TransformDirection dir);

/// (sum |f|^p h^3)^(1/p); p = infinity gives max |f|. The pointwise modulus
/// of a 2-component function is the Euclidean norm of the component vector.
double lp_norm(const GridFunction& f, double p);

/// L2 inner product <f, g> = sum f conj(g) h^3 over all components.
complexd inner_product(const GridFunction& f, const GridFunction& g);

/// Fraction of the |f|^2 mass within 2h of the box boundary (any axis).
/// Time-evolution results are flagged once this exceeds the scenario
/// tolerance, since dispersive decay on the torus is only meaningful
/// before wraparound.
double boundary_mass_fraction(const GridFunction& f);

} // namespace speclab

#endif
