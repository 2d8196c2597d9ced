#include "ucp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "ucp/errors.hpp"
#include "ucp/parallel.hpp"
#include "ucp/rng.hpp"

namespace ucp::spectral {

namespace {

using Vec = std::vector<double>;

Vec random_unit(std::int64_t n, std::uint64_t seed, std::uint64_t salt = 0) {
    auto gen = rng::stream(seed, 0x5eedULL + salt);
    Vec v(static_cast<std::size_t>(n));
    for (auto& x : v) x = gen.next_normal();
    const double nrm = det_norm2(v);
    for (auto& x : v) x /= nrm;
    return v;
}

void axpy(Vec& y, double a, const Vec& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// ---------------------------------------------------------------------------
// IC(0) factorization of A = H + sigma I (strictly lower CSR + diag)

struct IC0 {
    std::int64_t n = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int32_t> col;
    std::vector<double> val;
    std::vector<double> diag;
    bool ok = false;

    void solve(std::span<const double> r, std::span<double> x) const {
        for (std::int64_t i = 0; i < n; ++i) {
            double s = r[static_cast<std::size_t>(i)];
            for (std::int64_t k = row_ptr[static_cast<std::size_t>(i)];
                 k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                s -= val[static_cast<std::size_t>(k)] *
                     x[static_cast<std::size_t>(col[static_cast<std::size_t>(k)])];
            x[static_cast<std::size_t>(i)] = s / diag[static_cast<std::size_t>(i)];
        }
        for (std::int64_t i = n - 1; i >= 0; --i) {
            const double xi = x[static_cast<std::size_t>(i)] / diag[static_cast<std::size_t>(i)];
            x[static_cast<std::size_t>(i)] = xi;
            for (std::int64_t k = row_ptr[static_cast<std::size_t>(i)];
                 k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                x[static_cast<std::size_t>(col[static_cast<std::size_t>(k)])] -=
                    val[static_cast<std::size_t>(k)] * xi;
        }
    }
};

IC0 ic0_factor(const SparseSymmetricOperator& H, double sigma) {
    IC0 f;
    f.n = H.n;
    f.row_ptr.assign(static_cast<std::size_t>(H.n) + 1, 0);
    f.diag.assign(static_cast<std::size_t>(H.n), 0.0);

    std::vector<double> adiag(static_cast<std::size_t>(H.n), sigma);
    for (std::int64_t i = 0; i < H.n; ++i) {
        for (std::int64_t k = H.row_ptr[static_cast<std::size_t>(i)];
             k < H.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            const std::int32_t j = H.col[static_cast<std::size_t>(k)];
            if (j < i)
                ++f.row_ptr[static_cast<std::size_t>(i) + 1];
            else if (j == i)
                adiag[static_cast<std::size_t>(i)] += H.val[static_cast<std::size_t>(k)];
        }
        if (H.has_potential())
            adiag[static_cast<std::size_t>(i)] += H.diagonal_potential[static_cast<std::size_t>(i)];
    }
    for (std::int64_t i = 0; i < H.n; ++i)
        f.row_ptr[static_cast<std::size_t>(i) + 1] += f.row_ptr[static_cast<std::size_t>(i)];
    f.col.resize(static_cast<std::size_t>(f.row_ptr.back()));
    f.val.resize(f.col.size());
    {
        std::vector<std::int64_t> w(f.row_ptr.begin(), f.row_ptr.end() - 1);
        for (std::int64_t i = 0; i < H.n; ++i)
            for (std::int64_t k = H.row_ptr[static_cast<std::size_t>(i)];
                 k < H.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
                const std::int32_t j = H.col[static_cast<std::size_t>(k)];
                if (j < i) {
                    const auto slot = static_cast<std::size_t>(w[static_cast<std::size_t>(i)]++);
                    f.col[slot] = j;
                    f.val[slot] = H.val[static_cast<std::size_t>(k)];
                }
            }
    }

    for (std::int64_t i = 0; i < H.n; ++i) {
        double di = adiag[static_cast<std::size_t>(i)];
        const std::int64_t ib = f.row_ptr[static_cast<std::size_t>(i)];
        const std::int64_t ie = f.row_ptr[static_cast<std::size_t>(i) + 1];
        for (std::int64_t k = ib; k < ie; ++k) {
            const std::int32_t j = f.col[static_cast<std::size_t>(k)];
            double s = f.val[static_cast<std::size_t>(k)];
            std::int64_t pi = ib;
            std::int64_t pj = f.row_ptr[static_cast<std::size_t>(j)];
            const std::int64_t je = f.row_ptr[static_cast<std::size_t>(j) + 1];
            while (pi < k && pj < je) {
                const std::int32_t ci = f.col[static_cast<std::size_t>(pi)];
                const std::int32_t cj = f.col[static_cast<std::size_t>(pj)];
                if (ci == cj) {
                    s -= f.val[static_cast<std::size_t>(pi)] * f.val[static_cast<std::size_t>(pj)];
                    ++pi;
                    ++pj;
                } else if (ci < cj) {
                    ++pi;
                } else {
                    ++pj;
                }
            }
            const double lij = s / f.diag[static_cast<std::size_t>(j)];
            f.val[static_cast<std::size_t>(k)] = lij;
            di -= lij * lij;
        }
        if (!(di > 0.0)) return f; // breakdown; caller retries with larger shift
        f.diag[static_cast<std::size_t>(i)] = std::sqrt(di);
    }
    f.ok = true;
    return f;
}

// ---------------------------------------------------------------------------
// preconditioned CG for (H + sigma I) x = b, x starts at 0

struct CgStats {
    int iterations = 0;
    double rel_residual = 0.0;
};

CgStats cg_solve(const SparseSymmetricOperator& H, double sigma, const IC0* prec,
                 std::span<const double> b, std::span<double> x, double tol, int max_iter) {
    const std::int64_t n = H.n;
    Vec r(b.begin(), b.end());
    std::fill(x.begin(), x.end(), 0.0);
    Vec z(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n)), Ap(static_cast<std::size_t>(n));
    const double bnorm = det_norm2(r);
    CgStats st;
    if (bnorm == 0.0) return st;

    auto precond = [&](const Vec& rr, Vec& zz) {
        if (prec && prec->ok) {
            prec->solve(rr, zz);
        } else {
            for (std::int64_t i = 0; i < n; ++i)
                zz[static_cast<std::size_t>(i)] =
                    rr[static_cast<std::size_t>(i)] / (H.diag_entry(i) + sigma);
        }
    };

    precond(r, z);
    p = z;
    double rz = det_dot(r, z);
    Vec xv(static_cast<std::size_t>(n), 0.0);
    for (int it = 0; it < max_iter; ++it) {
        H.mat_vec_shifted(p, Ap, sigma);
        const double pAp = det_dot(p, Ap);
        if (!(pAp > 0.0)) break;
        const double alpha = rz / pAp;
        axpy(xv, alpha, p);
        axpy(r, -alpha, Ap);
        st.iterations = it + 1;
        const double rn = det_norm2(r);
        st.rel_residual = rn / bnorm;
        if (rn <= tol * bnorm) break;
        precond(r, z);
        const double rz_new = det_dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::int64_t i = 0; i < n; ++i)
            p[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] + beta * p[static_cast<std::size_t>(i)];
    }
    std::copy(xv.begin(), xv.end(), x.begin());
    return st;
}

double gershgorin_min(const SparseSymmetricOperator& H) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < H.n; ++i) {
        double diag = H.has_potential() ? H.diagonal_potential[static_cast<std::size_t>(i)] : 0.0;
        double off = 0.0;
        for (std::int64_t k = H.row_ptr[static_cast<std::size_t>(i)];
             k < H.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            if (H.col[static_cast<std::size_t>(k)] == i)
                diag += H.val[static_cast<std::size_t>(k)];
            else
                off += std::abs(H.val[static_cast<std::size_t>(k)]);
        }
        lo = std::min(lo, diag - off);
    }
    return lo;
}

} // namespace

// ---------------------------------------------------------------------------
// smallest_eigs: Rayleigh-Ritz over a shift-inverted Krylov basis with full
// reorthogonalization and thick restart.

SpectralResult smallest_eigs(const SparseSymmetricOperator& H, int k, double tol_rel,
                             std::uint64_t seed) {
    EigOptions o;
    o.tol_rel = tol_rel;
    o.seed = seed;
    return smallest_eigs(H, k, o);
}

SpectralResult smallest_eigs(const SparseSymmetricOperator& H, int k, const EigOptions& opts) {
    const std::int64_t n = H.n;
    if (k < 1 || k > n) throw invalid_params("smallest_eigs: need 1 <= k <= n");
    if (!(opts.tol_rel > 0.0)) throw invalid_params("smallest_eigs: tol must be positive");

    SpectralResult res;
    const double normest = H.inf_norm();
    const double tol_abs = opts.tol_rel * std::max(1.0, normest);

    if (normest == 0.0) { // zero operator
        for (int i = 0; i < k; ++i) {
            Vec v(static_cast<std::size_t>(n), 0.0);
            v[static_cast<std::size_t>(i)] = 1.0;
            res.eigenvectors.push_back(std::move(v));
            res.eigenvalues.push_back(0.0);
            res.residuals.push_back(0.0);
        }
        res.converged = true;
        return res;
    }

    double sigma = opts.shift_scale * normest + std::max(0.0, -gershgorin_min(H));
    IC0 fact;
    for (int attempt = 0; attempt < 4; ++attempt) {
        fact = ic0_factor(H, sigma);
        if (fact.ok) break;
        sigma *= 10.0;
    }
    const IC0* prec = fact.ok ? &fact : nullptr;

    const int mmax = static_cast<int>(std::min<std::int64_t>(n, std::max(opts.max_basis, k + 2)));

    std::vector<Vec> V;
    V.push_back(random_unit(n, opts.seed));
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(mmax, mmax);
    int ops = 0;
    int inject_salt = 1;

    Vec w(static_cast<std::size_t>(n));

    auto make_result = [&](const Eigen::MatrixXd& S, const Eigen::VectorXd& gam, int kk,
                           bool check_converged) {
        // top kk Ritz pairs of OP (largest gamma) = smallest eigenvalues of H
        struct Pair {
            double lambda;
            Vec y;
            double resid;
        };
        std::vector<Pair> pairs;
        const int m = static_cast<int>(gam.size());
        for (int t = 0; t < kk; ++t) {
            const int idx = m - 1 - t;
            const double gamma = gam(idx);
            if (!(gamma > 0.0)) continue;
            Vec y(static_cast<std::size_t>(n), 0.0);
            for (int i = 0; i < m; ++i) axpy(y, S(i, idx), V[static_cast<std::size_t>(i)]);
            const double ynrm = det_norm2(y);
            for (auto& c : y) c /= ynrm;
            const double lambda = 1.0 / gamma - sigma;
            Vec hy(static_cast<std::size_t>(n));
            H.mat_vec(y, hy);
            axpy(hy, -lambda, y);
            pairs.push_back({lambda, std::move(y), det_norm2(hy)});
        }
        std::sort(pairs.begin(), pairs.end(),
                  [](const Pair& a, const Pair& b) { return a.lambda < b.lambda; });
        res.eigenvalues.clear();
        res.eigenvectors.clear();
        res.residuals.clear();
        bool all_ok = static_cast<int>(pairs.size()) == k;
        for (auto& p : pairs) {
            if (p.resid > tol_abs) all_ok = false;
            res.eigenvalues.push_back(p.lambda);
            res.eigenvectors.push_back(std::move(p.y));
            res.residuals.push_back(p.resid);
        }
        res.iterations = ops;
        res.converged = check_converged ? all_ok : false;
        return all_ok;
    };

    for (;;) {
        const int j = static_cast<int>(V.size()) - 1;
        cg_solve(H, sigma, prec, V[static_cast<std::size_t>(j)], w, opts.cg_tol, opts.cg_max_iter);
        ++ops;

        for (int i = 0; i <= j; ++i) {
            const double t = det_dot(w, V[static_cast<std::size_t>(i)]);
            T(i, j) = T(j, i) = t;
        }
        for (int i = 0; i <= j; ++i) axpy(w, -T(i, j), V[static_cast<std::size_t>(i)]);
        for (int i = 0; i <= j; ++i) { // second pass
            const double c = det_dot(w, V[static_cast<std::size_t>(i)]);
            axpy(w, -c, V[static_cast<std::size_t>(i)]);
        }
        const double beta = det_norm2(w);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(j + 1, j + 1));
        const Eigen::VectorXd gam = es.eigenvalues(); // ascending
        const Eigen::MatrixXd S = es.eigenvectors();
        const int kk = std::min(k, j + 1);

        if (make_result(S, gam, kk, true)) return res;
        if (ops >= opts.max_op_applies) return res; // partial, converged == false

        const double op_scale = std::max(gam.cwiseAbs().maxCoeff(), 1e-300);
        if (beta <= 1e-13 * op_scale) {
            // invariant subspace: top up with a fresh direction if we still
            // need more pairs, otherwise accept what we have
            if (j + 1 >= std::min<std::int64_t>(static_cast<std::int64_t>(k) + 1, n) ||
                j + 1 == static_cast<int>(n))
                return res;
            Vec nv = random_unit(n, opts.seed, static_cast<std::uint64_t>(inject_salt++));
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= j; ++i)
                    axpy(nv, -det_dot(nv, V[static_cast<std::size_t>(i)]), V[static_cast<std::size_t>(i)]);
            const double nn = det_norm2(nv);
            if (nn < 1e-12) return res;
            for (auto& c : nv) c /= nn;
            V.push_back(std::move(nv));
        } else if (j + 1 == mmax) {
            // thick restart: keep the best Ritz vectors plus the residual
            const int keep = std::min(std::max(2 * k, k + 4), mmax - 2);
            std::vector<Vec> newV;
            newV.reserve(static_cast<std::size_t>(keep) + 1);
            Eigen::VectorXd kept_gamma(keep);
            for (int t = 0; t < keep; ++t) {
                const int idx = j - t; // j+1-1-t: descending gamma
                Vec y(static_cast<std::size_t>(n), 0.0);
                for (int i = 0; i <= j; ++i) axpy(y, S(i, idx), V[static_cast<std::size_t>(i)]);
                kept_gamma(t) = gam(idx);
                newV.push_back(std::move(y));
            }
            // re-orthonormalize kept vectors against drift
            for (int t = 0; t < keep; ++t) {
                for (int q = 0; q < t; ++q)
                    axpy(newV[static_cast<std::size_t>(t)],
                         -det_dot(newV[static_cast<std::size_t>(t)], newV[static_cast<std::size_t>(q)]),
                         newV[static_cast<std::size_t>(q)]);
                const double nn = det_norm2(newV[static_cast<std::size_t>(t)]);
                for (auto& c : newV[static_cast<std::size_t>(t)]) c /= nn;
            }
            Vec r(w);
            for (auto& c : r) c /= beta;
            for (int t = 0; t < keep; ++t)
                axpy(r, -det_dot(r, newV[static_cast<std::size_t>(t)]), newV[static_cast<std::size_t>(t)]);
            const double rn = det_norm2(r);
            for (auto& c : r) c /= rn;
            newV.push_back(std::move(r));
            V = std::move(newV);
            T.setZero();
            for (int t = 0; t < keep; ++t) T(t, t) = kept_gamma(t);
            // the border column is recomputed when the residual vector expands
        } else {
            Vec nv(w);
            for (auto& c : nv) c /= beta;
            V.push_back(std::move(nv));
        }
    }
}

// ---------------------------------------------------------------------------

double certified_spectral_bound(const SparseSymmetricOperator& H, std::uint64_t seed) {
    const double gersh = H.inf_norm();
    if (gersh == 0.0) return 0.0;
    Vec v = random_unit(H.n, seed, 0x0b0bULL);
    Vec w(static_cast<std::size_t>(H.n));
    double theta = 0.0, resid = 0.0;
    for (int it = 0; it < 200; ++it) {
        H.mat_vec(v, w);
        const double th = det_dot(v, w);
        Vec r(w);
        axpy(r, -th, v);
        resid = det_norm2(r);
        const double wn = det_norm2(w);
        if (wn == 0.0) {
            theta = 0.0;
            break;
        }
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / wn;
        const bool settled = it > 8 && std::abs(th - theta) <= 1e-5 * std::max(std::abs(th), 1e-300);
        theta = th;
        if (settled) break;
    }
    const double est = 1.01 * (std::abs(theta) + resid);
    return std::min(gersh, est);
}

// ---------------------------------------------------------------------------
// Chebyshev machinery

namespace {

// e^{-z} I_k(z) for k = 0..m by trapezoid quadrature of
// (1/pi) int_0^pi e^{z(cos th - 1)} cos(k th) dth; the integrand is entire
// and periodic, so the rule converges geometrically.
std::vector<double> scaled_bessel_i(double z, int m) {
    std::vector<double> out(static_cast<std::size_t>(m) + 1, 0.0);
    if (z < 1e-14) {
        out[0] = 1.0;
        return out;
    }
    const int nq = std::max({1024, 6 * m, 6 * static_cast<int>(std::ceil(std::sqrt(z)))});
    std::vector<double> w(static_cast<std::size_t>(nq) + 1);
    std::vector<double> th(static_cast<std::size_t>(nq) + 1);
    for (int j = 0; j <= nq; ++j) {
        th[static_cast<std::size_t>(j)] = M_PI * j / nq;
        w[static_cast<std::size_t>(j)] = std::exp(z * (std::cos(th[static_cast<std::size_t>(j)]) - 1.0));
    }
    for (int k = 0; k <= m; ++k) {
        double s = 0.5 * (w[0] + w[static_cast<std::size_t>(nq)] * std::cos(k * M_PI));
        for (int j = 1; j < nq; ++j)
            s += w[static_cast<std::size_t>(j)] * std::cos(k * th[static_cast<std::size_t>(j)]);
        out[static_cast<std::size_t>(k)] = std::max(s / nq, 0.0);
    }
    return out;
}

// forward Chebyshev recurrence: out = sum_k coeffs[k] T_k(Y) f with
// Y = (2/b) H - I
void chebyshev_apply(const SparseSymmetricOperator& H, double b, std::span<const double> coeffs,
                     std::span<const double> f, std::span<double> out) {
    const std::int64_t n = H.n;
    const double scale = 2.0 / b;
    Vec u_prev(f.begin(), f.end()); // T_0 f
    Vec u_cur(static_cast<std::size_t>(n)), tmp(static_cast<std::size_t>(n));

    auto applyY = [&](const Vec& x, Vec& y) {
        H.mat_vec(x, y);
        for (std::int64_t i = 0; i < n; ++i)
            y[static_cast<std::size_t>(i)] =
                scale * y[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)];
    };

    for (std::int64_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = coeffs[0] * u_prev[static_cast<std::size_t>(i)];
    if (coeffs.size() == 1) return;
    applyY(u_prev, u_cur); // T_1 f
    for (std::int64_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] += coeffs[1] * u_cur[static_cast<std::size_t>(i)];
    for (std::size_t k = 2; k < coeffs.size(); ++k) {
        applyY(u_cur, tmp);
        for (std::int64_t i = 0; i < n; ++i)
            tmp[static_cast<std::size_t>(i)] =
                2.0 * tmp[static_cast<std::size_t>(i)] - u_prev[static_cast<std::size_t>(i)];
        u_prev.swap(u_cur);
        u_cur.swap(tmp);
        for (std::int64_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] += coeffs[k] * u_cur[static_cast<std::size_t>(i)];
    }
}

} // namespace

void apply_heat(const SparseSymmetricOperator& H, HeatActionParams& params,
                std::span<const double> f, std::span<double> out) {
    if (!(params.t >= 0.0)) throw invalid_params("apply_heat: t must be >= 0");
    if (!(params.tolerance > 0.0)) throw invalid_params("apply_heat: tolerance must be positive");
    if (params.spectral_bound <= 0.0)
        params.spectral_bound = certified_spectral_bound(H, params.seed);
    const std::int64_t n = H.n;

    const double b = 1.05 * params.spectral_bound; // domain margin
    const double z = 0.5 * params.t * b;
    if (z < 1e-12) {
        // ||tH|| tiny: short Taylor series is exact to tolerance
        Vec term(f.begin(), f.end()), tmp(static_cast<std::size_t>(n));
        std::copy(f.begin(), f.end(), out.begin());
        for (int j = 1; j <= 8; ++j) {
            H.mat_vec(term, tmp);
            for (std::int64_t i = 0; i < n; ++i)
                term[static_cast<std::size_t>(i)] = -params.t / j * tmp[static_cast<std::size_t>(i)];
            for (std::int64_t i = 0; i < n; ++i)
                out[static_cast<std::size_t>(i)] += term[static_cast<std::size_t>(i)];
        }
        params.degree_used = 8;
        params.achieved_error = 0.0;
        return;
    }

    if (params.cached_z != z || params.cached_tol != params.tolerance || params.cheb_coeffs.empty()) {
        // choose the degree from the coefficient tail: |c_k| = 2 e^{-z} I_k(z)
        const int mcap = std::max(
            64, static_cast<int>(std::ceil(
                    1.15 * std::sqrt(2.0 * z * std::log(1.0 / std::min(params.tolerance, 1e-1))) + 24.0)));
        const auto s = scaled_bessel_i(z, mcap);
        std::vector<double> suffix(s.size() + 1, 0.0);
        for (int k = static_cast<int>(s.size()) - 1; k >= 0; --k)
            suffix[static_cast<std::size_t>(k)] =
                suffix[static_cast<std::size_t>(k) + 1] + 2.0 * s[static_cast<std::size_t>(k)];
        int m = mcap;
        for (int k = 0; k <= mcap; ++k) {
            if (suffix[static_cast<std::size_t>(k) + 1] <= params.tolerance) {
                m = k;
                break;
            }
        }
        params.cheb_coeffs.assign(static_cast<std::size_t>(m) + 1, 0.0);
        for (int k = 0; k <= m; ++k) {
            const double c = (k == 0 ? 1.0 : 2.0) * s[static_cast<std::size_t>(k)];
            params.cheb_coeffs[static_cast<std::size_t>(k)] = (k % 2 == 0) ? c : -c;
        }
        params.cached_z = z;
        params.cached_tol = params.tolerance;
        params.degree_used = m;
        params.achieved_error = suffix[static_cast<std::size_t>(m) + 1];
    }
    chebyshev_apply(H, b, params.cheb_coeffs, f, out);
}

// ---------------------------------------------------------------------------

double ProjectorResult::eval_poly(double lambda) const {
    if (coeffs.empty()) return lambda <= emax ? 1.0 : 0.0;
    const double y = 2.0 * lambda / domain_bound - 1.0;
    double tprev = 1.0, tcur = y, acc = coeffs[0];
    if (coeffs.size() > 1) acc += coeffs[1] * y;
    for (std::size_t k = 2; k < coeffs.size(); ++k) {
        const double tn = 2.0 * y * tcur - tprev;
        tprev = tcur;
        tcur = tn;
        acc += coeffs[k] * tcur;
    }
    return acc;
}

ProjectorResult spectral_projector_apply(const SparseSymmetricOperator& H, double emax,
                                         std::span<const double> f, ProjectorVia via,
                                         const ProjectorOptions& opts) {
    ProjectorResult out;
    out.via = via;
    out.emax = emax;
    const std::int64_t n = H.n;
    out.out.assign(static_cast<std::size_t>(n), 0.0);

    if (via == ProjectorVia::eigenpairs) {
        const double scale = std::max(1.0, H.inf_norm());
        const double straddle = opts.tol * scale;
        int k = 1;
        SpectralResult sr;
        for (;;) {
            sr = smallest_eigs(H, k, opts.tol, opts.seed);
            if (!sr.converged)
                throw std::runtime_error("projector: eigensolver did not converge");
            if (sr.eigenvalues.back() > emax || k >= opts.max_pairs ||
                k == static_cast<int>(n))
                break;
            k = std::min({2 * k, opts.max_pairs, static_cast<int>(n)});
        }
        for (double lam : sr.eigenvalues)
            if (std::abs(lam - emax) < straddle)
                throw gap_unresolved("projector: eigenvalue straddles the interval edge");
        if (sr.eigenvalues.back() <= emax && k < static_cast<int>(n) && k >= opts.max_pairs)
            throw std::runtime_error("projector: pair cap reached before clearing the interval");
        for (std::size_t i = 0; i < sr.eigenvalues.size(); ++i) {
            if (sr.eigenvalues[i] > emax) continue;
            const double c = det_dot(sr.eigenvectors[i], f);
            for (std::int64_t q = 0; q < n; ++q)
                out.out[static_cast<std::size_t>(q)] += c * sr.eigenvectors[i][static_cast<std::size_t>(q)];
            ++out.pairs_used;
        }
        return out;
    }

    // Jackson-damped Chebyshev approximation of the indicator of [0, emax]
    const double bound = certified_spectral_bound(H, opts.seed);
    const double b = std::max(1.05 * bound, emax * 1.05 + 1e-300);
    const int m = std::max(8, opts.filter_degree);
    const double y0 = std::clamp(2.0 * emax / b - 1.0, -1.0, 1.0);
    const double th0 = std::acos(y0);
    out.coeffs.assign(static_cast<std::size_t>(m) + 1, 0.0);
    out.coeffs[0] = 1.0 - th0 / M_PI;
    const double denom = M_PI / (m + 1.0);
    const double cot = std::cos(denom) / std::sin(denom);
    for (int k = 1; k <= m; ++k) {
        const double ck = -2.0 * std::sin(k * th0) / (k * M_PI);
        const double g = ((m - k + 1.0) * std::cos(k * denom) + std::sin(k * denom) * cot) / (m + 1.0);
        out.coeffs[static_cast<std::size_t>(k)] = ck * g;
    }
    out.domain_bound = b;
    out.degree = m;
    chebyshev_apply(H, b, out.coeffs, f, out.out);
    return out;
}

// ---------------------------------------------------------------------------

std::vector<std::int64_t> dof_embedding(const GridDiscretization& grid1,
                                        const GridDiscretization& grid2) {
    if (grid1.dim != grid2.dim || grid1.shape != grid2.shape ||
        std::abs(grid1.h - grid2.h) > 1e-12 * grid1.h)
        throw invalid_params("dof_embedding: grids do not share a layout");
    for (int i = 0; i < grid1.dim; ++i)
        if (std::abs(grid1.origin[static_cast<std::size_t>(i)] - grid2.origin[static_cast<std::size_t>(i)]) >
            1e-9 * grid1.h)
            throw invalid_params("dof_embedding: grid origins differ");
    std::vector<std::int64_t> map(static_cast<std::size_t>(grid2.n_dofs));
    for (std::int64_t d2 = 0; d2 < grid2.n_dofs; ++d2) {
        const std::int64_t node = grid2.node_of_dof[static_cast<std::size_t>(d2)];
        const std::int64_t d1 = grid1.dof_of_node[static_cast<std::size_t>(node)];
        if (d1 < 0) throw invalid_params("dof_embedding: sub-grid dof missing in host grid");
        map[static_cast<std::size_t>(d2)] = d1;
    }
    return map;
}

NormEstimate semigroup_diff_norm(const SparseSymmetricOperator& H1, const GridDiscretization& grid1,
                                 const SparseSymmetricOperator& H2, const GridDiscretization& grid2,
                                 double t, int probes, double heat_tolerance, std::uint64_t seed) {
    return semigroup_diff_norm(H1, H2, dof_embedding(grid1, grid2), t, probes, heat_tolerance,
                               seed);
}

NormEstimate semigroup_diff_norm(const SparseSymmetricOperator& H1,
                                 const SparseSymmetricOperator& H2,
                                 const std::vector<std::int64_t>& embed, double t, int probes,
                                 double heat_tolerance, std::uint64_t seed) {
    if (probes < 1) throw invalid_params("semigroup_diff_norm: probes >= 1");
    if (static_cast<std::int64_t>(embed.size()) != H2.n)
        throw invalid_params("semigroup_diff_norm: embedding size mismatch");
    const std::int64_t n = H1.n;

    HeatActionParams p1, p2;
    p1.t = p2.t = t;
    p1.tolerance = p2.tolerance = heat_tolerance;
    p1.seed = p2.seed = seed;
    p1.spectral_bound = certified_spectral_bound(H1, seed);
    p2.spectral_bound = certified_spectral_bound(H2, seed);

    Vec u1(static_cast<std::size_t>(n)), restricted(static_cast<std::size_t>(H2.n));
    Vec u2(static_cast<std::size_t>(H2.n));

    auto apply_diff = [&](const Vec& x, Vec& y) {
        apply_heat(H1, p1, x, u1);
        for (std::int64_t i = 0; i < H2.n; ++i)
            restricted[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(embed[static_cast<std::size_t>(i)])];
        apply_heat(H2, p2, restricted, u2);
        y = u1;
        for (std::int64_t i = 0; i < H2.n; ++i)
            y[static_cast<std::size_t>(embed[static_cast<std::size_t>(i)])] -= u2[static_cast<std::size_t>(i)];
    };

    NormEstimate best;
    for (int pr = 0; pr < probes; ++pr) {
        Vec v = random_unit(n, seed, 0xd1ffULL + static_cast<std::uint64_t>(pr));
        Vec w(static_cast<std::size_t>(n));
        double theta = 0.0, resid = 0.0;
        int iters = 0;
        for (int it = 0; it < 100; ++it) {
            apply_diff(v, w);
            const double th = det_dot(v, w);
            Vec r(w);
            axpy(r, -th, v);
            resid = det_norm2(r);
            const double wn = det_norm2(w);
            ++iters;
            if (wn < 1e-300) {
                theta = th;
                break;
            }
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / wn;
            const bool settled = it > 3 && std::abs(std::abs(th) - std::abs(theta)) <=
                                               1e-4 * std::max(std::abs(th), 1e-300);
            theta = th;
            if (settled) break;
        }
        if (std::abs(theta) > best.value) {
            best.value = std::abs(theta);
            best.residual = resid;
            best.iterations = iters;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

void dense_eigh(std::span<const double> a_row_major, std::int64_t n, std::vector<double>& evals,
                std::vector<std::vector<double>>& evecs) {
    Eigen::MatrixXd A(n, n);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j)
            A(i, j) = a_row_major[static_cast<std::size_t>(i * n + j)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    evals.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    evecs.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
    for (std::int64_t c = 0; c < n; ++c)
        for (std::int64_t r = 0; r < n; ++r)
            evecs[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)] = es.eigenvectors()(r, c);
}

} // namespace ucp::spectral
