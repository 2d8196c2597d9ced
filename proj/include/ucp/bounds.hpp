#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ucp::bounds {

// Dimension-dependent constants used throughout the closed-form bounds.
// All are pure functions of d >= 3.
struct DimensionalConstants {
    int d = 3;
    double omega_d = 0.0;     // volume of the unit ball
    double bessel_zero = 0.0; // first positive zero of J_{d/2-1}
    double c_mu0 = 0.0;       // d(d-2)/18^d
    double big_a = 0.0;       // (1 + 2^{d/2+2})^{1/2}
    double c_prime = 0.0;     // 2^-8 d(d-2)/18^d
    double a_prime = 0.0;     // d(d-2)/(2*18^d*A)
    double a_exp = 0.0;       // 1/(4*sqrt(2))

    static DimensionalConstants make(int d);
};

// Value of one named bound, with the inputs that produced it. `units` is
// "1/length^2" for eigenvalue bounds and "" for dimensionless quantities.
struct BoundReport {
    std::string name;
    std::map<std::string, double> inputs;
    double value = 0.0;
    std::string units;
    // secondary named values (e.g. the upper annulus bound)
    std::map<std::string, double> extra;
    std::vector<std::string> notes;
};

struct AnnulusBounds {
    double lower = 0.0;
    std::optional<double> upper;
};

// Two-sided bounds for the bottom of the spectrum with a Dirichlet ball of
// radius rho inside a region of outradius R (full-gradient normalization):
// lower = d(d-2) rho^{d-2} / R^d,
// upper = 2^d omega_d rho^{d-2} / (vol_G - omega_d (2 rho)^d).
AnnulusBounds annulus_bounds(double rho, double R, int d,
                             std::optional<double> vol_G = std::nullopt);

// (d-2) (rho/sqrt(d))^{d-2} / ell^d
double ballpool_lower(double rho, double ell, int d);

// d(d-2)/3^d * rho^{d-2} / R^d
double general_lower(double rho, double R, int d);

// rho^{d-1} / R^{d+1}; unit prefactor, meaningful only in ratios.
double davies_comparison(double rho, double R, int d);

// 2^{d/2+2} exp(-rho^2/(16 alpha)); can exceed 1.
double hit_and_run_bound(double rho, double alpha, int d);

// sqrt(1 + 4*2^{d/2}) exp(-rho sqrt(beta)/(4 sqrt 2))
double semigroup_diff_bound(double rho, double beta, int d);

// Ground Dirichlet eigenvalue of -1/2 Laplacian on a ball of radius R:
// z^2/(2 R^2) with z the first positive zero of J_{d/2-1}.
double ball_dirichlet_eigenvalue(double R, int d);

// omega_d (2^d - 1) r^{d-2} + omega_d 2^d r^d
double capacity_upper(double r, int d);

enum class Regime { fading, nonfading, solid };

struct RegimeResult {
    Regime regime = Regime::fading;
    std::vector<double> sequence; // rho_n^{d-2} / R_n^d, returned for audit
    double tail_infimum = 0.0;
    double first_value = 0.0;
};

// Classification of an obstacle sequence. Conventions (defaults): the tail
// window is the last half of the sequence; `solid` when the tail infimum
// exceeds solid_factor * first value; `nonfading` when it exceeds
// nonfading_factor * first value; `fading` otherwise.
RegimeResult homogenization_regime(const std::vector<double>& rhos, const std::vector<double>& Rs,
                                   int d, double nonfading_factor = 0.5,
                                   double solid_factor = 100.0);

struct KappaFirstStep {
    double mu0_lower = 0.0; // c_mu0 * delta^{d-2} / R^d
    double E_t = 0.0;       // t * mu0_lower
    double kappa_t = 0.0;   // (1-t) c' (delta/R)^d [lam - log((1-t) a' delta^{d-2}/R^d)]^-2
    double bracket = 0.0;   // the [...] term, for audit
};

KappaFirstStep kappa_first_step(double delta, double R, double lambda_omega, double t, int d);

// beta_0 = (a_exp rho)^-2 [lam - log((1-t) mu0 / (2A))]^2
double optimal_beta(double rho, double mu0, double lambda_omega, double t, int d);

struct KappaFinal {
    double I_max = 0.0;
    double kappa = 0.0;
    // the constant chain, recorded so reports can show the derivation
    double C = 0.0; // I_max = C * eta0 * delta^{d-2}/R^d
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double bracket = 0.0;
};

// Final-form constants: C = c_mu0/2 (t = 1/2); b = bessel_zero^2; a and c
// are the first-step constants with the worst-case geometric adjustments
// delta -> delta/8 and R -> 6R folded in:
//   c = (1/2) c' / 48^d,   a = 32 a' / 48^d.
// kappa = c (delta/R)^d [ b/(R ^ R_G)^2 + |log(a delta^{d-2}/R^d)| ]^-2.
KappaFinal kappa_final(double delta, double R, double R_G, double eta0, int d);

const char* regime_name(Regime r);

// Evaluates a named scalar bound from a key/value argument map (the CLI and
// batch surface). Known names: annulus_bounds, ballpool_lower, general_lower,
// davies_comparison, hit_and_run_bound, semigroup_diff_bound,
// ball_dirichlet_eigenvalue, capacity_upper, kappa_first_step, optimal_beta,
// kappa_final, constants.
BoundReport evaluate_bound(const std::string& name, const std::map<std::string, double>& args);

} // namespace ucp::bounds
