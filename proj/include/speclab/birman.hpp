// SPDX-License-Identifier: Apache-2.0

#ifndef SPECLAB_BIRMAN_HPP
#define SPECLAB_BIRMAN_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "speclab/grid.hpp"
#include "speclab/resolvent.hpp"
#include "speclab/scenario.hpp"

namespace speclab {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Pointwise multiplicative factorization V = V1 V2 on the potential's
/// support points. Scalar case: V1 = V / sqrt|V|, V2 = sqrt|V| >= 0.
/// Matrix case: V2 is the pointwise PSD square root of sigma3 V and
/// V1 = sigma3 V2; the block sigma3 V = [[W1, W2], [conj W2, W1]] must be
/// PSD at every support point.
struct PotentialFactors {
    Grid3 grid;
    HamiltonianSpec hamiltonian;
    std::vector<std::size_t> support;          // grid indices, ascending
    std::vector<std::array<double, 3>> points; // coordinates of support cells
    // Per-point c x c blocks (c = 1 or 2), row-major in 4 slots.
    std::vector<std::array<complexd, 4>> v1, v2;

    int comp() const { return hamiltonian.components(); }
    std::size_t dim() const { return support.size() * comp(); }
    /// Multiplication matrix of a per-point block family.
    Matrix block_matrix(const std::vector<std::array<complexd, 4>>& blocks) const;
    Matrix v1_matrix() const { return block_matrix(v1); }
    Matrix v2_matrix() const { return block_matrix(v2); }
    /// Multiplication by V itself (product of the factors, exact pointwise).
    Matrix v_matrix() const;
    /// Embeds a support-space vector into a grid function.
    GridFunction embed(const Vector& x) const;
    /// Restriction of a grid function to the support points.
    Vector restrict_to_support(const GridFunction& f) const;
};

PotentialFactors split_potential(const Scenario& scn);

/// Alternate factorization V1 = V, V2 = 1 on the support (used by the
/// conjugation-independence check; bounded potentials make it legal).
PotentialFactors split_potential_plain(const Scenario& scn);

/// Free-resolvent kernel matrix on support space, h^3 quadrature weights
/// and the singular-cell diagonal included.
Matrix resolvent_matrix(const PotentialFactors& pf, const ResolventQuery& q);

struct BSMatrix {
    ResolventQuery query;
    Matrix entries; // V2 R0(lambda) V1, dense on support space
};

BSMatrix bs_matrix(const PotentialFactors& pf, const ResolventQuery& q);

/// Perturbed resolvent R_V = R0 - R0 V1 (I + V2 R0 V1)^(-1) V2 R0 on
/// support space.
Matrix perturbed_resolvent(const PotentialFactors& pf, const ResolventQuery& q);

struct ExceptionalScan {
    std::vector<complexd> lambdas;
    std::vector<double> sigma_min; // of I + V2 R0(lambda) V1
    struct Dip {
        double lambda;    // refined location (real-axis scans)
        double sigma_min; // refined depth
    };
    std::vector<Dip> dips;
};

/// Smallest singular value of I + V2 R0(lambda - i0) V1 sampled over a real
/// window; local minima below the dip threshold are refined by golden
/// section to 1e-6 in lambda. The window must stay clear of the branch
/// points by the exclusion radius.
ExceptionalScan exceptional_scan(const PotentialFactors& pf, double lo, double hi, int resolution,
                                 double dip_threshold = 0.05, double branch_exclusion = 1e-3,
                                 bool refine = true);

/// sigma_min landscape over a complex rectangle (no refinement).
ExceptionalScan exceptional_scan_rect(const PotentialFactors& pf, double re_lo, double re_hi,
                                      int n_re, double im_lo, double im_hi, int n_im);

/// Contour spectral coefficient P^k at an isolated exceptional value:
/// trapezoid quadrature of the perturbed resolvent around |z - zeta| = eps,
/// oriented and signed so that P^0 acts as the identity on the generalized
/// eigenspace. Throws if a node is ill-conditioned (condition > 1e12).
Matrix riesz_projection(const PotentialFactors& pf, complexd zeta, int k, double eps,
                        int nodes = 64);

struct ProjectionSet {
    std::vector<complexd> eigenvalues;
    std::vector<double> radii;
    // Contour data restricted to support space. p0_kernel carries the raw
    // kernel samples of the Riesz projection (what spectral pairings need);
    // p0 is the oblique idempotent with the same range/corange (the model's
    // own spectral projection; a plain restriction of a global projection
    // is not idempotent, its trace being only the interior mass).
    std::vector<Matrix> p0_kernel, p0, p1;
    std::vector<int> ranks;
    std::vector<complexd> grid_traces;             // raw trace of the grid extension
    std::vector<double> extension_gram_deviations; // raw ||W - I|| before biorthogonalization
    std::vector<double> idempotency_residuals;     // of the applied projection
    std::vector<double> nilpotent_ratios;          // ||P1|| / ||P0||, support space
    Matrix p_c, p_p;                            // support space, from model p0
    // Rank factors extending each P^0 to the grid: P f = sum_i G_i <f, H_i>.
    std::vector<GridFunction> grid_range;    // G_i across all eigenvalues
    std::vector<GridFunction> grid_cofactor; // H_i matching grid_range
    std::vector<std::pair<int, int>> factor_span; // [begin, end) per eigenvalue

    bool empty() const { return eigenvalues.empty(); }
};

/// P_c = I - sum of the P^0 projections at the scan's refined dips, with
/// idempotency/rank diagnostics and the grid-extended rank-one factors
/// (eigenfunctions extended through R0 application).
ProjectionSet continuous_projection(const PotentialFactors& pf, const ExceptionalScan& scan);

/// P_c applied to a grid function through the rank factors.
GridFunction apply_pc_grid(const ProjectionSet& proj, const GridFunction& f);
GridFunction apply_pp_grid(const ProjectionSet& proj, const GridFunction& f);

struct SpectralResolutionResult {
    double discrepancy = 0;      // |quadrature + projections - <f,g>| / (||f|| ||g||)
    complexd integral{0, 0};     // continuous-spectrum part
    complexd projection_sum{0, 0};
    double tail_estimate = 0;    // fitted C / sqrt(Lambda_max) truncation tail
};

/// Checks the spectral resolution of the identity: the branch-jump integral
/// of R_V over the continuous spectrum window [up to Lambda_max] plus the
/// point projections recovers <f, g>. f, g are support-space vectors and the
/// pairing carries the h^3 weight.
SpectralResolutionResult spectral_resolution_check(const PotentialFactors& pf,
                                                   const ProjectionSet& proj, const Vector& f,
                                                   const Vector& g, double lambda_max,
                                                   int nodes = 400);

struct ModifiedFactors {
    Matrix f1, f2;                      // V - P_p H = F1 F2 on support space
    double reconstruction_residual = 0; // relative, against V - (sum zeta P0 + P1)
    bool rank_gap_warning = false;      // pseudo-inverse cut not clearly separated
};

/// Finite-rank corrected factorization: A = (P_p* P_p)^(1/2),
/// F2 = V2 + A, F1 = V1 G1 - G2 with G1 = V2 (V2+A)^+, G2 = (H P_p)(V2+A)^+,
/// where H P_p is assembled from the contour data as sum_k (zeta_k P0_k + P1_k).
ModifiedFactors modified_split(const PotentialFactors& pf, const ProjectionSet& proj);

/// sigma_min of I + F2 R0(lambda - i0) F1 over a real window (the modified
/// operator must stay invertible where the original had its dips removed).
std::vector<double> modified_invertibility_scan(const PotentialFactors& pf,
                                                const ModifiedFactors& mf, double lo, double hi,
                                                int resolution);

/// max over lambda samples in [lo, hi] of the support-space operator norm
/// of R_V(lambda - i0) P_c; reported (finite), not thresholded.
double resolvent_pc_sup(const PotentialFactors& pf, const ProjectionSet& proj, double lo,
                        double hi, int samples);

} // namespace speclab

#endif
