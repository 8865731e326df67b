// SPDX-License-Identifier: Apache-2.0

#ifndef SPECLAB_SCENARIO_HPP
#define SPECLAB_SCENARIO_HPP

#include <array>
#include <optional>
#include <string>

#include "speclab/grid.hpp"
#include "speclab/hamiltonian.hpp"

namespace speclab {

/// Named analytic potential shapes, instantiated on the grid at load time.
/// Sampled shapes come from a raw complex64 file (see read_samples_file).
struct PotentialShape {
    enum class Kind { ball, gaussian, file };
    Kind kind = Kind::ball;
    double radius = 1.0;     // ball
    double sigma = 1.0;      // gaussian
    double amplitude = 0.0;  // ball depth or gaussian peak
    std::string path;        // file

    /// Half-width of the support box the shape occupies (gaussians are
    /// treated as supported where the envelope exceeds 1e-14 of the peak).
    double support_extent() const;
};

struct FrameSpec {
    std::array<double, 3> v_amp = {0.0, 0.0, 0.0};
    double a_amp = 0.0;
    double omega = 1.0;
    bool enabled = false;
};

struct ScanSpec {
    double lo = -3.0;
    double hi = -0.0015;
    int resolution = 200;
    // Optional complex rectangle for landscape scans.
    bool has_rect = false;
    double re_lo = 0, re_hi = 0, im_lo = 0, im_hi = 0;
    int n_re = 0, n_im = 0;
};

struct Tolerances {
    double dip_threshold = 0.05;
    double branch_exclusion = 1e-3;
    double boundary_mass = 1e-3;
};

struct RunSpec {
    double T = 8.0;
    double dt = 1.0 / 64.0;
};

/// A fully validated problem instance: grid, Hamiltonian form, realized
/// potential samples, optional moving frame, scan windows and tolerances.
struct Scenario {
    Grid3 grid;
    HamiltonianSpec hamiltonian;

    // Scalar case uses `v`; matrix case uses `w1`, `w2`.
    std::optional<PotentialShape> v_shape;
    std::optional<PotentialShape> w1_shape, w2_shape;
    GridFunction v;        // 1 component, zero if matrix case
    GridFunction w1, w2;   // 1 component each, zero if scalar case

    FrameSpec frame;
    ScanSpec scan;
    Tolerances tol;
    RunSpec run;
    std::uint64_t seed = 1;

    bool is_matrix() const { return hamiltonian.kind == HamiltonianKind::matrix; }
    /// Pointwise matrix potential block [[W1, W2], [-conj(W2), -W1]] at a point.
    std::array<complexd, 4> matrix_block(std::size_t idx) const;
    /// sup-norm of the potential: |V| scalar, largest singular value of the
    /// pointwise block in the matrix case.
    double potential_sup_norm() const;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& base_dir);
std::string emit_scenario(const Scenario& s);

/// Samples an analytic shape centered at `center` (periodic minimum-image
/// distances). File-backed shapes are translated with a spectral phase
/// shift instead.
GridFunction realize_shape_shifted(const PotentialShape& s, const Grid3& g,
                                   const std::array<double, 3>& center);

/// Raw little-endian complex64 sample file: 32-byte header (8-byte magic
/// "SLABPOT\0", uint32 n, uint32 components, 16 reserved bytes) followed by
/// components * n^3 float32 re/im pairs, z index fastest.
GridFunction read_samples_file(const std::string& path, const Grid3& grid);
void write_samples_file(const std::string& path, const GridFunction& f);

/// Decimal with 17 significant digits; the canonical float form in every
/// text artifact this library emits.
std::string format_float(double x);

} // namespace speclab

#endif
