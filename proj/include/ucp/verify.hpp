#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucp/bounds.hpp"
#include "ucp/geometry.hpp"
#include "ucp/operators.hpp"
#include "ucp/spectral.hpp"

namespace ucp {

struct CurveResult {
    std::vector<std::pair<double, double>> points; // (beta, lambda_beta)
    bool nondecreasing = true;
    bool concave = true;
};

// lambda_beta for each beta on H0 + beta * diag(mask); verifies the curve is
// nondecreasing and concave (divided differences on consecutive triples).
CurveResult lambda_beta_curve(const SparseSymmetricOperator& H0,
                              const std::vector<std::uint8_t>& mask,
                              const std::vector<double>& betas, double tol_rel,
                              std::uint64_t seed = 1);

// Copy of base with beta added to the diagonal potential on masked dofs.
SparseSymmetricOperator with_mask_potential(const SparseSymmetricOperator& base,
                                            const std::vector<std::uint8_t>& mask, double beta);

struct BlsResult {
    double kappa_bls = 0.0;
    double best_beta = 0.0;
    bool any_valid_beta = false;
    bool certified = false;
    double direct_min = 0.0; // min eigenvalue of P_I W P_I on range(P_I)
    int pairs_in_interval = 0;
    std::string note;
};

// kappa_bls = max over betas of (lambda_beta - emax)/beta over betas with
// lambda_beta > emax. For n <= dense_cap the claim P_I W P_I >= kappa_bls P_I
// is verified directly by dense eigendecomposition.
BlsResult verify_bls(const SparseSymmetricOperator& H, const std::vector<std::uint8_t>& B_mask,
                     double emax, const std::vector<double>& betas, double tol = 1e-9,
                     std::int64_t dense_cap = 2000);

struct EigRow {
    double lambda = 0.0;
    double mass_ratio = 0.0; // ||f 1_B||^2 / ||f||^2
    bool pass = false;
};

struct UCPReport {
    // geometry summary
    int d = 3;
    double R = 0.0, delta = 0.0, R_G = 0.0, eta0 = 1.0, t = 0.5;
    std::size_t input_balls = 0, skeleton_points = 0;
    double denseness_margin = 0.0;

    // interval and kappas
    double I_max = 0.0;
    double kappa_final = 0.0;     // closed-form final constants
    double kappa_t = 0.0;         // first-step value at lambda_omega_used
    double kappa_bls = 0.0;       // from the coupling curve
    double beta0 = 0.0;
    bounds::KappaFinal kappa_chain; // constant derivation, for the report

    // spectral data
    double mu0_numeric = 0.0;          // lambda_1 of the S-removed operator (extrapolated)
    double mu0_numeric_gradform = 0.0; // 2x: full-gradient normalization
    double mu0_paper_lower = 0.0;
    double lambda_omega_numeric = 0.0;
    double lambda_omega_bessel = 0.0;
    double lambda_omega_used = 0.0;
    int case_fired = 0; // 11, 12, 21, 22, 23
    double witness_radius = 0.0;
    Point witness_center;
    int witness_shrinks = 0;

    std::vector<std::pair<double, double>> lambda_beta; // headline-B curve
    std::vector<std::pair<double, double>> lambda_beta_work;
    std::vector<std::pair<double, double>> mu_beta;

    std::vector<EigRow> rows;
    double mass_ratio_constant = 0.0;
    double vol_fraction_B = 0.0;

    // pass flags (self-auditing: all derivable from stored numbers)
    bool pass_headline = false;
    bool pass_constant_margin = false; // constant-vector ratio >= 10x kappa
    bool pass_mu0 = false;
    bool pass_chain = false;
    bool curve_nondecreasing = false;
    bool curve_concave = false;
    bool bls_certified = false;
    bool flag_kappa_final_above_bls = false; // anomaly, not a failure

    // provenance
    double h = 0.0;
    int refine = 1;
    std::uint64_t seed = 1;
    std::vector<std::string> notes;

    bool all_pass() const {
        return pass_headline && pass_mu0 && pass_chain && curve_nondecreasing && curve_concave;
    }
};

struct VerifyOptions {
    double R = 0.0;
    double delta = 0.0;
    double eta0 = 1.0;
    double t = 0.5;
    double h = 0.0;
    int refine = 1; // 1: Richardson over {h, h/2} for mu0
    std::vector<double> betas; // empty: geometric grid around beta0
    std::uint64_t seed = 1;
    double tol = 1e-8;
    int max_pairs = 64;
    CoefficientField a_field; // empty: pure Laplacian
    double denseness_spacing = 0.0; // 0: delta/2
};

// End-to-end verification pipeline: certifies denseness, builds the working
// skeleton sets, computes mu0 / lambda_Omega numerically and by closed form,
// evaluates beta0 / E_t / kappa_t / kappa_final, runs the coupling curves and
// the ordering chain, and checks the mass ratio of every eigenvector with
// eigenvalue in I against eta0 * kappa.
UCPReport verify_main(const ConvexDomain& G, const BallUnion& B_input, const VerifyOptions& opt);

} // namespace ucp
