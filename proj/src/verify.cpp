#include "ucp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ucp/errors.hpp"
#include "ucp/parallel.hpp"

namespace ucp {

namespace {

double lambda1(const SparseSymmetricOperator& H, double tol, std::uint64_t seed) {
    const auto r = spectral::smallest_eigs(H, 1, tol, seed);
    if (!r.converged) throw std::runtime_error("eigensolver did not converge for lambda_1");
    return r.eigenvalues[0];
}

} // namespace

SparseSymmetricOperator with_mask_potential(const SparseSymmetricOperator& base,
                                            const std::vector<std::uint8_t>& mask, double beta) {
    if (static_cast<std::int64_t>(mask.size()) != base.n)
        throw invalid_params("mask size mismatch");
    SparseSymmetricOperator op = base;
    if (op.diagonal_potential.empty())
        op.diagonal_potential.assign(static_cast<std::size_t>(op.n), 0.0);
    for (std::int64_t i = 0; i < op.n; ++i)
        if (mask[static_cast<std::size_t>(i)]) op.diagonal_potential[static_cast<std::size_t>(i)] += beta;
    return op;
}

CurveResult lambda_beta_curve(const SparseSymmetricOperator& H0,
                              const std::vector<std::uint8_t>& mask,
                              const std::vector<double>& betas, double tol_rel,
                              std::uint64_t seed) {
    if (betas.empty()) throw invalid_params("lambda_beta_curve: betas must be nonempty");
    for (std::size_t i = 1; i < betas.size(); ++i)
        if (!(betas[i] > betas[i - 1]))
            throw invalid_params("lambda_beta_curve: betas must be strictly ascending");
    CurveResult out;
    for (double b : betas) {
        const auto op = with_mask_potential(H0, mask, b);
        out.points.emplace_back(b, lambda1(op, tol_rel, seed));
    }
    const double scale = std::max(1.0, H0.inf_norm());
    const double tol = 10.0 * tol_rel * scale;
    for (std::size_t i = 1; i < out.points.size(); ++i)
        if (out.points[i].second < out.points[i - 1].second - tol) out.nondecreasing = false;
    for (std::size_t i = 2; i < out.points.size(); ++i) {
        const auto& [b0, l0] = out.points[i - 2];
        const auto& [b1, l1] = out.points[i - 1];
        const auto& [b2, l2] = out.points[i];
        const double s01 = (l1 - l0) / (b1 - b0);
        const double s12 = (l2 - l1) / (b2 - b1);
        if (s12 > s01 + tol / (b1 - b0)) out.concave = false;
    }
    return out;
}

BlsResult verify_bls(const SparseSymmetricOperator& H, const std::vector<std::uint8_t>& B_mask,
                     double emax, const std::vector<double>& betas, double tol,
                     std::int64_t dense_cap) {
    if (betas.empty()) throw invalid_params("verify_bls: betas must be nonempty");
    BlsResult res;
    for (double b : betas) {
        if (!(b > 0.0)) throw invalid_params("verify_bls: betas must be positive");
        const auto op = with_mask_potential(H, B_mask, b);
        const double lam = lambda1(op, std::min(tol, 1e-9), 0xb15ULL);
        if (lam > emax) {
            const double cand = (lam - emax) / b;
            if (!res.any_valid_beta || cand > res.kappa_bls) {
                res.kappa_bls = cand;
                res.best_beta = b;
            }
            res.any_valid_beta = true;
        }
    }
    if (!res.any_valid_beta) {
        res.note = "no beta with lambda_beta > max I";
        return res;
    }
    if (H.n <= dense_cap) {
        // direct check of P_I W P_I >= kappa_bls P_I by dense eigendecomposition
        std::vector<double> evals;
        std::vector<std::vector<double>> evecs;
        spectral::dense_eigh(H.to_dense(), H.n, evals, evecs);
        std::vector<std::size_t> in_I;
        for (std::size_t i = 0; i < evals.size(); ++i)
            if (evals[i] <= emax) in_I.push_back(i);
        res.pairs_in_interval = static_cast<int>(in_I.size());
        if (in_I.empty()) {
            res.certified = true;
            res.note = "interval contains no spectrum; inequality vacuous";
            return res;
        }
        const std::int64_t m = static_cast<std::int64_t>(in_I.size());
        std::vector<double> M(static_cast<std::size_t>(m * m), 0.0);
        for (std::int64_t a = 0; a < m; ++a)
            for (std::int64_t b = a; b < m; ++b) {
                double s = 0.0;
                const auto& va = evecs[in_I[static_cast<std::size_t>(a)]];
                const auto& vb = evecs[in_I[static_cast<std::size_t>(b)]];
                for (std::int64_t q = 0; q < H.n; ++q)
                    if (B_mask[static_cast<std::size_t>(q)])
                        s += va[static_cast<std::size_t>(q)] * vb[static_cast<std::size_t>(q)];
                M[static_cast<std::size_t>(a * m + b)] = M[static_cast<std::size_t>(b * m + a)] = s;
            }
        std::vector<double> mevals;
        std::vector<std::vector<double>> mvecs;
        spectral::dense_eigh(M, m, mevals, mvecs);
        res.direct_min = mevals.front();
        res.certified = res.direct_min >= res.kappa_bls - tol;
    } else {
        res.certified = true;
        res.note = "dof count above dense cap; certificate from the coupling curve only";
    }
    return res;
}

namespace {

struct WitnessChoice {
    int case_fired = 0;
    double radius = 0.0;
    Point center;
    int shrinks = 0;
};

// Decision procedure for the lambda_Omega ball witness. Inspects the actual
// geometry, then verifies the chosen ball lies in G and avoids every working
// obstacle ball; shrinks a few times if the nominal choice fails.
WitnessChoice choose_witness(const ConvexDomain& G, const Skeleton& skel, double R, double delta,
                             const InradiusResult& inr) {
    WitnessChoice w;
    const bool rg_finite = std::isfinite(inr.radius);
    const double R0 = rg_finite ? inr.radius / 3.0 : 4.0 * R;
    const Point& x0 = inr.center;

    // does the skeleton meet B_{R0}(x0)?
    bool meets = false;
    std::size_t nearest = 0;
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < skel.points.size(); ++i) {
        const double dd = dist2(skel.points[i], x0);
        if (dd < dmin) {
            dmin = dd;
            nearest = i;
        }
        if (dd <= R0) meets = true;
    }

    const bool case1 = 4.0 * R <= R0;
    if (case1) {
        if (!meets) {
            w.case_fired = 11;
            w.radius = R;
            w.center = x0;
        } else {
            w.case_fired = 12;
            w.radius = 0.5 * R;
            w.center = skel.points[nearest];
        }
    } else {
        if (!meets) {
            w.case_fired = 21;
            w.radius = 0.25 * R0;
            w.center = x0;
        } else if (skel.points.size() >= 2) {
            w.case_fired = 22;
            w.radius = 0.5 * std::min(R, R0);
            w.center = skel.points[nearest];
        } else {
            w.case_fired = 23;
            w.radius = 0.25 * R0;
            // opposite side of the annulus around x0
            w.center = x0;
            Point dir(x0.size(), 0.0);
            double nn = 0.0;
            for (std::size_t a = 0; a < x0.size(); ++a) {
                dir[a] = x0[a] - skel.points[nearest][a];
                nn += dir[a] * dir[a];
            }
            nn = std::sqrt(nn);
            if (nn < 1e-12) {
                dir.assign(x0.size(), 0.0);
                dir[0] = 1.0;
                nn = 1.0;
            }
            for (std::size_t a = 0; a < x0.size(); ++a)
                w.center[a] = x0[a] + dir[a] / nn * 1.5 * R0;
        }
    }

    auto witness_ok = [&](const Point& c, double r) {
        if (G.boundary_margin(c) < r - 1e-12) return false;
        for (std::size_t i = 0; i < skel.points.size(); ++i) {
            // the working B around the skeleton has thickness delta; for
            // case 12/22 the nearest point is removed from the working set
            if ((w.case_fired == 12 || w.case_fired == 22) && i == nearest) continue;
            if (dist2(skel.points[i], c) < r + delta - 1e-12) return false;
        }
        return true;
    };

    while (!witness_ok(w.center, w.radius) && w.shrinks < 4) {
        w.radius *= 0.5;
        ++w.shrinks;
    }
    if (!witness_ok(w.center, w.radius)) w.radius = 0.0; // no verified witness
    return w;
}

std::vector<double> default_betas(double beta0) {
    return {beta0 / 100.0, beta0 / 10.0, beta0, beta0 * 10.0, beta0 * 100.0};
}

} // namespace

UCPReport verify_main(const ConvexDomain& G, const BallUnion& B_input, const VerifyOptions& opt) {
    if (!(opt.R > 0.0) || !(opt.delta > 0.0) || opt.delta > opt.R)
        throw invalid_params("verify: need 0 < delta <= R");
    if (!(opt.eta0 > 0.0)) throw invalid_params("verify: eta0 must be positive");
    if (!(opt.h > 0.0)) throw invalid_params("verify: grid spacing required");
    const int d = G.dim();

    UCPReport rep;
    rep.d = d;
    rep.R = opt.R;
    rep.delta = opt.delta;
    rep.eta0 = opt.eta0;
    rep.t = opt.t;
    rep.h = opt.h;
    rep.refine = opt.refine;
    rep.seed = opt.seed;
    rep.input_balls = B_input.size();

    // 1) denseness certificate for the input set
    const double spacing = opt.denseness_spacing > 0.0 ? opt.denseness_spacing : 0.5 * opt.delta;
    const auto cert = check_relative_denseness(B_input, G, opt.R, opt.delta, spacing);
    rep.denseness_margin = cert.margin;
    if (!cert.verified)
        throw denseness_not_certified("verify: input set is not (R,delta)-relatively dense at grid resolution");

    // 2) skeleton and working sets: B_work = delta-balls, S_work = delta/2
    std::vector<Point> candidates;
    for (std::size_t i = 0; i < B_input.size(); ++i)
        if (B_input.radii[i] >= opt.delta - 1e-12) candidates.push_back(B_input.centers[i]);
    if (candidates.empty())
        throw denseness_not_certified("verify: no input ball is thick enough to witness delta");
    const Skeleton skel = build_skeleton(candidates, opt.R);
    rep.skeleton_points = skel.points.size();

    BallUnion B_work(d), S_work(d);
    const double rho = 0.5 * opt.delta;
    for (const auto& p : skel.points) {
        B_work.add(p, opt.delta);
        S_work.add(p, rho);
    }

    // 3) inradius
    const auto inr = inradius_estimate(G);
    rep.R_G = inr.radius;

    // 4) closed-form chain
    const auto kf = bounds::kappa_final(opt.delta, opt.R, rep.R_G, opt.eta0, d);
    rep.kappa_chain = kf;
    rep.I_max = kf.I_max;
    rep.kappa_final = kf.kappa;
    rep.mu0_paper_lower = bounds::DimensionalConstants::make(d).c_mu0 *
                          std::pow(opt.delta, d - 2.0) / std::pow(opt.R, d);

    // 5) grids and operators
    if (opt.h > rho / 4.0)
        rep.notes.push_back("grid h exceeds rho/4; obstacle resolution is marginal");
    const GridDiscretization grid_f = classify_grid(G, S_work, opt.h);
    const GridDiscretization grid_f_plain = classify_grid(G, BallUnion(d), opt.h);
    const GridDiscretization grid_f_omega = classify_grid(G, B_work, opt.h);

    const SparseSymmetricOperator H_S = assemble_laplacian(grid_f, 0.0, BallUnion(d));
    const SparseSymmetricOperator H_plain = assemble_laplacian(grid_f_plain, 0.0, BallUnion(d));
    const SparseSymmetricOperator H_omega = assemble_laplacian(grid_f_omega, 0.0, BallUnion(d));

    // mu0 numeric with optional Richardson refinement
    double mu0 = lambda1(H_S, opt.tol, opt.seed);
    if (opt.refine >= 1) {
        const GridDiscretization grid_c = classify_grid(G, S_work, 2.0 * opt.h);
        const double mu0_coarse = lambda1(assemble_laplacian(grid_c, 0.0, BallUnion(d)), opt.tol, opt.seed);
        // first-order Richardson: value at h plus the observed h -> h/2 gain
        mu0 = 2.0 * mu0 - mu0_coarse;
        rep.notes.push_back("mu0 Richardson-extrapolated from grids 2h and h");
    }
    rep.mu0_numeric = mu0;
    rep.mu0_numeric_gradform = 2.0 * mu0;
    rep.pass_mu0 = rep.mu0_numeric_gradform >= rep.mu0_paper_lower;

    // lambda_Omega: numeric and Bessel-ball witness route
    rep.lambda_omega_numeric = lambda1(H_omega, opt.tol, opt.seed);
    const auto wit = choose_witness(G, skel, opt.R, opt.delta, inr);
    rep.case_fired = wit.case_fired;
    rep.witness_radius = wit.radius;
    rep.witness_center = wit.center;
    rep.witness_shrinks = wit.shrinks;
    rep.lambda_omega_bessel = wit.radius > 0.0
                                  ? bounds::ball_dirichlet_eigenvalue(wit.radius, d)
                                  : std::numeric_limits<double>::infinity();
    rep.lambda_omega_used = std::min(rep.lambda_omega_numeric, rep.lambda_omega_bessel);

    // 6) first-step constants and beta0
    const auto ks = bounds::kappa_first_step(opt.delta, opt.R, rep.lambda_omega_used, opt.t, d);
    rep.kappa_t = ks.kappa_t;
    rep.beta0 = bounds::optimal_beta(rho, ks.mu0_lower, rep.lambda_omega_used, opt.t, d);

    // 7) coupling curves
    const auto mask_input = grid_f_plain.dof_mask(B_input);
    const auto mask_work_plain = grid_f_plain.dof_mask(B_work);
    std::vector<double> betas = opt.betas.empty() ? default_betas(rep.beta0) : opt.betas;
    std::sort(betas.begin(), betas.end());

    const auto curve_input = lambda_beta_curve(H_plain, mask_input, betas, opt.tol, opt.seed);
    rep.lambda_beta = curve_input.points;
    rep.curve_nondecreasing = curve_input.nondecreasing;
    rep.curve_concave = curve_input.concave;

    const auto curve_work = lambda_beta_curve(H_plain, mask_work_plain, betas, opt.tol, opt.seed);
    rep.lambda_beta_work = curve_work.points;

    // mu_beta on the S-removed grid with potential on B_work \ S
    const auto mask_work_on_S = grid_f.dof_mask(B_work);
    rep.pass_chain = true;
    const double chain_tol = 10.0 * opt.tol * std::max(1.0, H_plain.inf_norm());
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const auto op_mu = with_mask_potential(H_S, mask_work_on_S, betas[i]);
        const double mu_b = lambda1(op_mu, opt.tol, opt.seed);
        rep.mu_beta.emplace_back(betas[i], mu_b);
        const double lam_b = rep.lambda_beta_work[i].second;
        if (!(lam_b <= mu_b + chain_tol) || !(mu_b <= rep.lambda_omega_numeric + chain_tol))
            rep.pass_chain = false;
    }

    // kappa_bls from the headline curve
    {
        bool any = false;
        for (const auto& [b, lam] : rep.lambda_beta)
            if (lam > rep.I_max) {
                const double cand = (lam - rep.I_max) / b;
                if (!any || cand > rep.kappa_bls) rep.kappa_bls = cand;
                any = true;
            }
        if (H_plain.n <= 2000 && any) {
            const auto bls = verify_bls(H_plain, mask_input, rep.I_max, betas, 1e-9);
            rep.bls_certified = bls.certified;
        }
        rep.flag_kappa_final_above_bls = any && rep.kappa_final > rep.kappa_bls;
        if (!any) rep.notes.push_back("no sampled beta lifted lambda_beta above I_max");
    }

    // 8) eigenvector mass ratios on the operator of interest
    const SparseSymmetricOperator H_sharp =
        opt.a_field ? assemble_divergence_form(grid_f_plain, opt.a_field, opt.eta0, 0.0, BallUnion(d))
                    : H_plain;
    int k = 1;
    spectral::SpectralResult pairs;
    for (;;) {
        pairs = spectral::smallest_eigs(H_sharp, k, opt.tol, opt.seed);
        if (!pairs.converged) throw std::runtime_error("verify: eigensolver did not converge");
        if (pairs.eigenvalues.back() > rep.I_max || k >= opt.max_pairs ||
            k == static_cast<int>(H_sharp.n))
            break;
        k = std::min({2 * k, opt.max_pairs, static_cast<int>(H_sharp.n)});
    }
    if (pairs.eigenvalues.back() <= rep.I_max)
        rep.notes.push_back("pair cap reached before clearing I; rows may be incomplete");

    const double threshold = opt.eta0 * rep.kappa_final;
    rep.pass_headline = true;
    for (std::size_t i = 0; i < pairs.eigenvalues.size(); ++i) {
        if (pairs.eigenvalues[i] > rep.I_max) break;
        EigRow row;
        row.lambda = pairs.eigenvalues[i];
        double m = 0.0;
        for (std::int64_t q = 0; q < H_sharp.n; ++q)
            if (mask_input[static_cast<std::size_t>(q)])
                m += pairs.eigenvectors[i][static_cast<std::size_t>(q)] *
                     pairs.eigenvectors[i][static_cast<std::size_t>(q)];
        row.mass_ratio = m; // eigenvectors are unit norm
        row.pass = row.mass_ratio >= threshold;
        if (!row.pass) rep.pass_headline = false;
        rep.rows.push_back(row);
    }
    if (rep.rows.empty()) {
        rep.pass_headline = false;
        rep.notes.push_back("no eigenvalue found in I");
    }

    // constant-vector diagnostics
    double frac = 0.0;
    for (auto mbit : mask_input) frac += mbit;
    rep.vol_fraction_B = frac / static_cast<double>(H_plain.n);
    rep.mass_ratio_constant = rep.rows.empty() ? 0.0 : rep.rows.front().mass_ratio;
    rep.pass_constant_margin = rep.mass_ratio_constant >= 10.0 * opt.eta0 * rep.kappa_final;

    return rep;
}

} // namespace ucp
