#include "ucp/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "ucp/errors.hpp"
#include "ucp/parallel.hpp"

namespace ucp {

void SparseSymmetricOperator::mat_vec(std::span<const double> x, std::span<double> y) const {
    mat_vec_shifted(x, y, 0.0);
}

void SparseSymmetricOperator::mat_vec_shifted(std::span<const double> x, std::span<double> y,
                                              double sigma) const {
    const bool pot = has_potential();
    parallel_for(n, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) {
            double s = 0.0;
            for (std::int64_t k = row_ptr[static_cast<std::size_t>(i)];
                 k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                s += val[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col[static_cast<std::size_t>(k)])];
            if (pot) s += diagonal_potential[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            if (sigma != 0.0) s += sigma * x[static_cast<std::size_t>(i)];
            y[static_cast<std::size_t>(i)] = s;
        }
    });
}

double SparseSymmetricOperator::diag_entry(std::int64_t i) const {
    double d = has_potential() ? diagonal_potential[static_cast<std::size_t>(i)] : 0.0;
    for (std::int64_t k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
        if (col[static_cast<std::size_t>(k)] == i) d += val[static_cast<std::size_t>(k)];
    return d;
}

double SparseSymmetricOperator::entry(std::int64_t i, std::int64_t j) const {
    double v = 0.0;
    for (std::int64_t k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
        if (col[static_cast<std::size_t>(k)] == j) v += val[static_cast<std::size_t>(k)];
    if (i == j && has_potential()) v += diagonal_potential[static_cast<std::size_t>(i)];
    return v;
}

double SparseSymmetricOperator::laplacian_entry(std::int64_t i, std::int64_t j) const {
    double v = 0.0;
    for (std::int64_t k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
        if (col[static_cast<std::size_t>(k)] == j) v += val[static_cast<std::size_t>(k)];
    return v;
}

double SparseSymmetricOperator::inf_norm() const {
    double m = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double s = has_potential() ? std::abs(diagonal_potential[static_cast<std::size_t>(i)]) : 0.0;
        for (std::int64_t k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            s += std::abs(val[static_cast<std::size_t>(k)]);
        m = std::max(m, s);
    }
    return m;
}

double SparseSymmetricOperator::max_asymmetry() const {
    double m = 0.0;
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            const std::int64_t j = col[static_cast<std::size_t>(k)];
            if (j <= i) continue;
            m = std::max(m, std::abs(val[static_cast<std::size_t>(k)] - laplacian_entry(j, i)));
        }
    return m;
}

double SparseSymmetricOperator::row_sum(std::int64_t i) const {
    double s = 0.0;
    for (std::int64_t k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
        s += val[static_cast<std::size_t>(k)];
    return s;
}

std::vector<double> SparseSymmetricOperator::to_dense() const {
    std::vector<double> m(static_cast<std::size_t>(n * n), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            m[static_cast<std::size_t>(i * n + col[static_cast<std::size_t>(k)])] += val[static_cast<std::size_t>(k)];
        if (has_potential()) m[static_cast<std::size_t>(i * n + i)] += diagonal_potential[static_cast<std::size_t>(i)];
    }
    return m;
}

namespace {

// COO triplet accumulator that produces sorted CSR with summed duplicates.
class CsrBuilder {
  public:
    explicit CsrBuilder(std::int64_t n) : n_(n), rows_(static_cast<std::size_t>(n)) {}

    void add(std::int64_t i, std::int64_t j, double v) {
        rows_[static_cast<std::size_t>(i)].emplace_back(j, v);
    }

    SparseSymmetricOperator finish() {
        SparseSymmetricOperator op;
        op.n = n_;
        op.row_ptr.assign(static_cast<std::size_t>(n_) + 1, 0);
        std::int64_t nnz = 0;
        for (std::int64_t i = 0; i < n_; ++i) {
            auto& r = rows_[static_cast<std::size_t>(i)];
            std::sort(r.begin(), r.end());
            // merge duplicates
            std::size_t w = 0;
            for (std::size_t k = 0; k < r.size(); ++k) {
                if (w > 0 && r[w - 1].first == r[k].first)
                    r[w - 1].second += r[k].second;
                else
                    r[w++] = r[k];
            }
            r.resize(w);
            nnz += static_cast<std::int64_t>(w);
            op.row_ptr[static_cast<std::size_t>(i) + 1] = nnz;
        }
        op.col.reserve(static_cast<std::size_t>(nnz));
        op.val.reserve(static_cast<std::size_t>(nnz));
        for (auto& r : rows_)
            for (auto& [j, v] : r) {
                op.col.push_back(static_cast<std::int32_t>(j));
                op.val.push_back(v);
            }
        return op;
    }

  private:
    std::int64_t n_;
    std::vector<std::vector<std::pair<std::int64_t, double>>> rows_;
};

void apply_potential(SparseSymmetricOperator& op, const GridDiscretization& grid, double beta,
                     const BallUnion& B) {
    if (beta == 0.0 || B.empty()) return;
    op.diagonal_potential.assign(static_cast<std::size_t>(op.n), 0.0);
    const auto mask = grid.dof_mask(B);
    for (std::int64_t i = 0; i < op.n; ++i)
        if (mask[static_cast<std::size_t>(i)]) op.diagonal_potential[static_cast<std::size_t>(i)] = beta;
}

} // namespace

SparseSymmetricOperator assemble_laplacian(const GridDiscretization& grid, double beta,
                                           const BallUnion& B) {
    const double w = 0.5 / (grid.h * grid.h);
    CsrBuilder builder(grid.n_dofs);
    std::vector<std::int64_t> idx(static_cast<std::size_t>(grid.dim));
    for (std::int64_t dof = 0; dof < grid.n_dofs; ++dof) {
        const std::int64_t f = grid.node_of_dof[static_cast<std::size_t>(dof)];
        grid.node_multi_index(f, idx);
        for (int a = 0; a < grid.dim; ++a) {
            for (int sgn = -1; sgn <= 1; sgn += 2) {
                const std::int64_t v = idx[static_cast<std::size_t>(a)] + sgn;
                if (v < 0 || v >= grid.shape[static_cast<std::size_t>(a)]) continue;
                const std::int64_t nb = f + sgn * grid.stride(a);
                const NodeClass c = grid.node_class[static_cast<std::size_t>(nb)];
                if (c == NodeClass::outside) continue; // Neumann: edge truncated
                builder.add(dof, dof, w);
                if (c != NodeClass::dirichlet_removed) {
                    const std::int64_t j = grid.dof_of_node[static_cast<std::size_t>(nb)];
                    builder.add(dof, j, -w);
                }
            }
        }
    }
    SparseSymmetricOperator op = builder.finish();
    apply_potential(op, grid, beta, B);
    return op;
}

SparseSymmetricOperator assemble_divergence_form(const GridDiscretization& grid,
                                                 const CoefficientField& a_field, double eta0,
                                                 double beta, const BallUnion& B) {
    const int d = grid.dim;
    const double inv_h2 = 1.0 / (grid.h * grid.h);
    std::vector<double> a(static_cast<std::size_t>(d * d));

    auto sample = [&](const Point& x) {
        a_field(x, a);
        Eigen::MatrixXd m(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) m(r, c) = a[static_cast<std::size_t>(r * d + c)];
        const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()))
            throw ellipticity_violation("coefficient matrix is not symmetric at a sampled point");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < eta0 - 1e-12 * std::max(1.0, eta0)) {
            std::string where = "(";
            for (int i = 0; i < d; ++i)
                where += (i ? "," : "") + std::to_string(x[static_cast<std::size_t>(i)]);
            throw ellipticity_violation("coefficient matrix below eta0 at " + where + ")");
        }
    };

    CsrBuilder builder(grid.n_dofs);
    std::vector<std::int64_t> idx(static_cast<std::size_t>(grid.dim));
    Point face(static_cast<std::size_t>(d));

    for (std::int64_t dof = 0; dof < grid.n_dofs; ++dof) {
        const std::int64_t f = grid.node_of_dof[static_cast<std::size_t>(dof)];
        grid.node_multi_index(f, idx);
        const Point xi = grid.node_coord(f);

        // diagonal part of a: face-centered edge weights, as in the pure
        // Laplacian but with weight a_kk(face)/h^2 per edge
        for (int axis = 0; axis < d; ++axis) {
            for (int sgn = -1; sgn <= 1; sgn += 2) {
                const std::int64_t v = idx[static_cast<std::size_t>(axis)] + sgn;
                if (v < 0 || v >= grid.shape[static_cast<std::size_t>(axis)]) continue;
                const std::int64_t nb = f + sgn * grid.stride(axis);
                const NodeClass c = grid.node_class[static_cast<std::size_t>(nb)];
                if (c == NodeClass::outside) continue;
                face = xi;
                face[static_cast<std::size_t>(axis)] += 0.5 * sgn * grid.h;
                sample(face);
                const double w = 0.5 * a[static_cast<std::size_t>(axis * d + axis)] * inv_h2;
                builder.add(dof, dof, w);
                if (c != NodeClass::dirichlet_removed) {
                    const std::int64_t j = grid.dof_of_node[static_cast<std::size_t>(nb)];
                    builder.add(dof, j, -w);
                }
            }
        }

        // off-diagonal couplings: symmetric node-centered cross-difference
        // form  sum_i a_kl(x_i) (Dbar_k u)(Dbar_l u); assembled only where
        // both central differences exist on active nodes
        for (int k = 0; k < d; ++k) {
            for (int l = k + 1; l < d; ++l) {
                sample(xi);
                const double akl = a[static_cast<std::size_t>(k * d + l)];
                if (akl == 0.0) continue;
                auto active_pair = [&](int axis, std::int64_t& dplus, std::int64_t& dminus) {
                    const std::int64_t vi = idx[static_cast<std::size_t>(axis)];
                    if (vi - 1 < 0 || vi + 1 >= grid.shape[static_cast<std::size_t>(axis)]) return false;
                    const std::int64_t np = f + grid.stride(axis);
                    const std::int64_t nm = f - grid.stride(axis);
                    if (!grid.active(np) || !grid.active(nm)) return false;
                    dplus = grid.dof_of_node[static_cast<std::size_t>(np)];
                    dminus = grid.dof_of_node[static_cast<std::size_t>(nm)];
                    return true;
                };
                std::int64_t kp, km, lp, lm;
                if (!active_pair(k, kp, km) || !active_pair(l, lp, lm)) continue;
                // quadratic-form contribution akl/(4 h^2) (u_kp - u_km)(u_lp - u_lm),
                // symmetrized: adds akl/(8h^2) * (pairings) to both (k,l) and (l,k)
                // expand (u_kp - u_km)(u_lp - u_lm) into symmetric entries
                const double w = 0.5 * akl * inv_h2 / 4.0;
                builder.add(kp, lp, w);
                builder.add(lp, kp, w);
                builder.add(km, lm, w);
                builder.add(lm, km, w);
                builder.add(kp, lm, -w);
                builder.add(lm, kp, -w);
                builder.add(km, lp, -w);
                builder.add(lp, km, -w);
            }
        }
    }

    SparseSymmetricOperator op = builder.finish();
    apply_potential(op, grid, beta, B);
    return op;
}

CoefficientField identity_coefficients(int d) {
    return [d](std::span<const double>, std::span<double> a) {
        std::fill(a.begin(), a.end(), 0.0);
        for (int i = 0; i < d; ++i) a[static_cast<std::size_t>(i * d + i)] = 1.0;
    };
}

CoefficientField scalar_coefficients(int d, const std::function<double(std::span<const double>)>& s) {
    return [d, s](std::span<const double> x, std::span<double> a) {
        std::fill(a.begin(), a.end(), 0.0);
        const double v = s(x);
        for (int i = 0; i < d; ++i) a[static_cast<std::size_t>(i * d + i)] = v;
    };
}

} // namespace ucp
