#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ucp/grid.hpp"

namespace ucp {

// Symmetric sparse operator in CSR with the full (both-triangles) pattern,
// plus an optional diagonal potential kept separate so coupling terms and
// beta*1_B contributions stay distinguishable.
struct SparseSymmetricOperator {
    std::int64_t n = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int32_t> col;
    std::vector<double> val;
    std::vector<double> diagonal_potential; // empty or size n

    std::int64_t nnz() const { return static_cast<std::int64_t>(col.size()); }
    bool has_potential() const { return !diagonal_potential.empty(); }

    void mat_vec(std::span<const double> x, std::span<double> y) const;
    // y = (A + sigma I) x
    void mat_vec_shifted(std::span<const double> x, std::span<double> y, double sigma) const;
    double diag_entry(std::int64_t i) const;
    double entry(std::int64_t i, std::int64_t j) const;           // incl. potential
    double laplacian_entry(std::int64_t i, std::int64_t j) const; // stored part only
    double inf_norm() const;        // max absolute row sum including potential
    double max_asymmetry() const;   // max |A_ij - A_ji| over stored entries
    double row_sum(std::int64_t i) const; // Laplacian part only (no potential)

    // dense copy (n limited by caller); includes the potential
    std::vector<double> to_dense() const;
};

// Assembler working over lattice edges:
//   active-active edge  -> off-diagonal -w, both diagonals +w
//   active-removed edge -> diagonal +w  (Dirichlet by node removal)
//   active-outside edge -> nothing      (natural Neumann)
// with w = 1/(2 h^2), realizing one half of the standard graph Laplacian.
// beta adds beta to the diagonal potential of every dof whose node lies in B.
SparseSymmetricOperator assemble_laplacian(const GridDiscretization& grid, double beta,
                                           const BallUnion& B);

// Coefficient sampler: fills `a` (d*d row-major, symmetric) at position x.
using CoefficientField = std::function<void(std::span<const double> x, std::span<double> a)>;

// Face-centered flux discretization of 1/2 div(a grad): for the diagonal of
// a, edge weights are a_kk sampled at face midpoints; off-diagonal couplings
// use the symmetric node-centered cross-difference form. Sampled matrices
// must have smallest eigenvalue >= eta0 wherever queried.
SparseSymmetricOperator assemble_divergence_form(const GridDiscretization& grid,
                                                 const CoefficientField& a_field, double eta0,
                                                 double beta, const BallUnion& B);

// identity coefficient field (for tests and reductions)
CoefficientField identity_coefficients(int d);
// scalar(x) * identity
CoefficientField scalar_coefficients(int d, const std::function<double(std::span<const double>)>& s);

} // namespace ucp
