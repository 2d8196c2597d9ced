#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ucp/operators.hpp"

namespace ucp::spectral {

struct SpectralResult {
    std::vector<double> eigenvalues;                // ascending
    std::vector<std::vector<double>> eigenvectors;  // orthonormal, one per eigenvalue
    std::vector<double> residuals;                  // ||H v - lambda v||_2 per pair
    int iterations = 0;                             // inverse-operator applications
    bool converged = false;
};

struct EigOptions {
    double tol_rel = 1e-8;      // residual <= tol_rel * max(1, |H|_inf)
    std::uint64_t seed = 1;
    int max_basis = 48;         // thick-restart basis cap
    int max_op_applies = 400;
    double shift_scale = 1e-4;  // sigma = shift_scale * |H|_inf
    double cg_tol = 1e-11;
    int cg_max_iter = 20000;
};

// k smallest eigenpairs by shift-invert Lanczos (full reorthogonalization,
// thick restart) with conjugate-gradient inner solves preconditioned by
// IC(0). Residual certificates are computed directly on H, so inexact inner
// solves can slow convergence but never corrupt a reported pair.
SpectralResult smallest_eigs(const SparseSymmetricOperator& H, int k, double tol_rel,
                             std::uint64_t seed = 1);
SpectralResult smallest_eigs(const SparseSymmetricOperator& H, int k, const EigOptions& opts);

struct HeatActionParams {
    double t = 1.0;
    double tolerance = 1e-8;     // uniform error target, relative to ||f||
    double spectral_bound = 0.0; // upper estimate of ||H||; <= 0 means compute
    std::uint64_t seed = 1;
    // outputs
    int degree_used = 0;
    double achieved_error = 0.0; // Chebyshev tail bound actually reached
    // coefficient cache; reused while (t, spectral_bound, tolerance) match
    std::vector<double> cheb_coeffs;
    double cached_z = -1.0;
    double cached_tol = -1.0;
};

// Power-iteration upper estimate of ||H|| with a 1.01 safety factor,
// capped by the max absolute row sum (always a valid bound).
double certified_spectral_bound(const SparseSymmetricOperator& H, std::uint64_t seed = 1);

// out ~= exp(-t H) f via a Chebyshev expansion of exp(-t x) on
// [0, spectral_bound] with uniform coefficient-tail error <= tolerance.
void apply_heat(const SparseSymmetricOperator& H, HeatActionParams& params,
                std::span<const double> f, std::span<double> out);

enum class ProjectorVia { eigenpairs, polynomial_filter };

struct ProjectorOptions {
    double tol = 1e-9;    // solver tolerance and straddle threshold (relative)
    std::uint64_t seed = 1;
    int filter_degree = 400;
    int max_pairs = 64;
};

struct ProjectorResult {
    std::vector<double> out;
    ProjectorVia via = ProjectorVia::eigenpairs;
    // filter route: p(lambda) is evaluable so callers can audit the
    // achieved indicator error on any part of the spectrum
    std::vector<double> coeffs;
    double domain_bound = 0.0;
    double emax = 0.0;
    int degree = 0;
    // eigenpair route bookkeeping
    int pairs_used = 0;

    double eval_poly(double lambda) const;
};

// Applies the spectral projector P_[0,emax](H) to f, either through
// computed eigenpairs (throws gap_unresolved when an eigenvalue straddles
// emax within tolerance) or through a Jackson-damped Chebyshev filter.
ProjectorResult spectral_projector_apply(const SparseSymmetricOperator& H, double emax,
                                         std::span<const double> f, ProjectorVia via,
                                         const ProjectorOptions& opts = {});

struct NormEstimate {
    double value = 0.0;    // certified lower bound (a Rayleigh quotient)
    double residual = 0.0; // power-iteration residual at the reported vector
    int iterations = 0;
};

// Lower estimate of || exp(-t H1) - exp(-t H2) || where H2 lives on the
// sub-grid grid2 of grid1 and acts on the common space by zero extension.
// Power iteration on the symmetric difference using apply_heat.
NormEstimate semigroup_diff_norm(const SparseSymmetricOperator& H1, const GridDiscretization& grid1,
                                 const SparseSymmetricOperator& H2, const GridDiscretization& grid2,
                                 double t, int probes, double heat_tolerance = 1e-9,
                                 std::uint64_t seed = 1);

// Same with an explicit dof embedding: embed[i2] = dof of H1 carrying dof i2
// of H2.
NormEstimate semigroup_diff_norm(const SparseSymmetricOperator& H1,
                                 const SparseSymmetricOperator& H2,
                                 const std::vector<std::int64_t>& embed, double t, int probes,
                                 double heat_tolerance = 1e-9, std::uint64_t seed = 1);

// Dense EVD helper (ascending eigenvalues, orthonormal eigenvectors as rows
// of `evecs` chunks); n must be small enough for a dense solve.
void dense_eigh(std::span<const double> a_row_major, std::int64_t n, std::vector<double>& evals,
                std::vector<std::vector<double>>& evecs);

// Dof embedding between two grids with identical layout: result[i2] = dof in
// grid1 carrying the same node as dof i2 of grid2.
std::vector<std::int64_t> dof_embedding(const GridDiscretization& grid1,
                                        const GridDiscretization& grid2);

} // namespace ucp::spectral
