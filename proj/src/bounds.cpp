#include "ucp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ucp/errors.hpp"

namespace ucp::bounds {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(int d) {
    if (d < 3) throw invalid_params("dimension must be >= 3");
}

// First positive zero of J_nu by bracketing + bisection on std::cyl_bessel_j.
// The first zero of J_nu lies in (nu, nu + 2.5 nu^{1/3} + 3) for nu >= 0.
double first_bessel_zero(double nu) {
    double lo = std::max(nu, 1e-8);
    double hi = nu + 2.5 * std::cbrt(std::max(nu, 1.0)) + 3.0;
    // walk right until a sign change is bracketed
    double flo = std::cyl_bessel_j(nu, lo);
    while (std::cyl_bessel_j(nu, hi) > 0.0) {
        lo = hi;
        flo = std::cyl_bessel_j(nu, lo);
        hi += 2.0;
        if (hi > nu + 100.0) throw std::runtime_error("bessel zero bracketing failed");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = std::cyl_bessel_j(nu, mid);
        if ((f > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = f;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-14 * hi) break;
    }
    return 0.5 * (lo + hi);
}
} // namespace

DimensionalConstants DimensionalConstants::make(int d) {
    require_dim(d);
    DimensionalConstants c;
    c.d = d;
    c.omega_d = std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
    c.bessel_zero = first_bessel_zero(0.5 * d - 1.0);
    const double dd2 = static_cast<double>(d) * (d - 2.0);
    const double p18 = std::pow(18.0, d);
    c.c_mu0 = dd2 / p18;
    c.big_a = std::sqrt(1.0 + std::pow(2.0, 0.5 * d + 2.0));
    c.c_prime = c.c_mu0 / 256.0;
    c.a_prime = dd2 / (2.0 * p18 * c.big_a);
    c.a_exp = 1.0 / (4.0 * std::sqrt(2.0));
    return c;
}

AnnulusBounds annulus_bounds(double rho, double R, int d, std::optional<double> vol_G) {
    require_dim(d);
    if (!(rho > 0.0) || !(rho < R)) throw invalid_params("annulus: need 0 < rho < R");
    AnnulusBounds out;
    out.lower = static_cast<double>(d) * (d - 2.0) * std::pow(rho, d - 2.0) / std::pow(R, d);
    if (vol_G) {
        const auto c = DimensionalConstants::make(d);
        const double hole = c.omega_d * std::pow(2.0 * rho, d);
        if (!(*vol_G > hole))
            throw invalid_params("annulus: upper bound needs vol_G > omega_d (2 rho)^d");
        out.upper = std::pow(2.0, d) * c.omega_d * std::pow(rho, d - 2.0) / (*vol_G - hole);
    }
    return out;
}

double ballpool_lower(double rho, double ell, int d) {
    require_dim(d);
    if (!(rho > 0.0) || !(rho < 0.5 * ell)) throw invalid_params("ballpool: need 0 < rho < ell/2");
    return (d - 2.0) * std::pow(rho / std::sqrt(static_cast<double>(d)), d - 2.0) / std::pow(ell, d);
}

double general_lower(double rho, double R, int d) {
    require_dim(d);
    if (!(rho > 0.0) || !(rho <= R)) throw invalid_params("general bound: need 0 < rho <= R");
    return static_cast<double>(d) * (d - 2.0) / std::pow(3.0, d) * std::pow(rho, d - 2.0) /
           std::pow(R, d);
}

double davies_comparison(double rho, double R, int d) {
    require_dim(d);
    if (!(rho > 0.0) || !(rho < R)) throw invalid_params("davies: need 0 < rho < R");
    return std::pow(rho, d - 1.0) / std::pow(R, d + 1.0);
}

double hit_and_run_bound(double rho, double alpha, int d) {
    require_dim(d);
    if (!(rho > 0.0)) throw invalid_params("hit-and-run: rho must be positive");
    if (!(alpha > 0.0) || alpha > 1.0) throw invalid_params("hit-and-run: alpha in (0,1]");
    return std::pow(2.0, 0.5 * d + 2.0) * std::exp(-rho * rho / (16.0 * alpha));
}

double semigroup_diff_bound(double rho, double beta, int d) {
    require_dim(d);
    if (!(rho > 0.0) || !(beta > 0.0)) throw invalid_params("semigroup bound: rho,beta > 0");
    return std::sqrt(1.0 + 4.0 * std::pow(2.0, 0.5 * d)) *
           std::exp(-rho * std::sqrt(beta) / (4.0 * std::sqrt(2.0)));
}

double ball_dirichlet_eigenvalue(double R, int d) {
    require_dim(d);
    if (!(R > 0.0)) throw invalid_params("ball eigenvalue: R must be positive");
    const double z = DimensionalConstants::make(d).bessel_zero;
    return z * z / (2.0 * R * R);
}

double capacity_upper(double r, int d) {
    require_dim(d);
    if (!(r > 0.0)) throw invalid_params("capacity: r must be positive");
    const double omega = DimensionalConstants::make(d).omega_d;
    const double p2d = std::pow(2.0, d);
    return omega * (p2d - 1.0) * std::pow(r, d - 2.0) + omega * p2d * std::pow(r, d);
}

RegimeResult homogenization_regime(const std::vector<double>& rhos, const std::vector<double>& Rs,
                                   int d, double nonfading_factor, double solid_factor) {
    require_dim(d);
    if (rhos.empty() || rhos.size() != Rs.size())
        throw invalid_params("regime: sequences must be nonempty and of equal length");
    RegimeResult out;
    out.sequence.reserve(rhos.size());
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        if (!(rhos[i] > 0.0) || !(Rs[i] > 0.0)) throw invalid_params("regime: entries must be positive");
        out.sequence.push_back(std::pow(rhos[i], d - 2.0) / std::pow(Rs[i], d));
    }
    out.first_value = out.sequence.front();
    const std::size_t tail_begin = rhos.size() / 2;
    double inf = kInf;
    for (std::size_t i = tail_begin; i < out.sequence.size(); ++i) inf = std::min(inf, out.sequence[i]);
    out.tail_infimum = inf;
    if (inf > solid_factor * out.first_value)
        out.regime = Regime::solid;
    else if (inf > nonfading_factor * out.first_value)
        out.regime = Regime::nonfading;
    else
        out.regime = Regime::fading;
    return out;
}

KappaFirstStep kappa_first_step(double delta, double R, double lambda_omega, double t, int d) {
    require_dim(d);
    if (!(delta > 0.0) || delta > R) throw invalid_params("kappa step: need 0 < delta <= R");
    if (!(lambda_omega > 0.0)) throw invalid_params("kappa step: lambda_omega must be positive");
    if (!(t > 0.0) || !(t < 1.0)) throw invalid_params("kappa step: t in (0,1)");
    const auto c = DimensionalConstants::make(d);
    const double density = std::pow(delta, d - 2.0) / std::pow(R, d);
    KappaFirstStep out;
    out.mu0_lower = c.c_mu0 * density;
    out.E_t = t * out.mu0_lower;
    const double log_arg = (1.0 - t) * c.a_prime * density;
    out.bracket = lambda_omega - std::log(log_arg);
    if (!(out.bracket > 0.0))
        throw degenerate_log("kappa step: bracket term is nonpositive");
    out.kappa_t = (1.0 - t) * c.c_prime * std::pow(delta / R, d) / (out.bracket * out.bracket);
    return out;
}

double optimal_beta(double rho, double mu0, double lambda_omega, double t, int d) {
    require_dim(d);
    if (!(rho > 0.0) || !(mu0 > 0.0) || !(lambda_omega > 0.0))
        throw invalid_params("optimal beta: inputs must be positive");
    if (!(t > 0.0) || !(t < 1.0)) throw invalid_params("optimal beta: t in (0,1)");
    const auto c = DimensionalConstants::make(d);
    const double bracket = lambda_omega - std::log((1.0 - t) * mu0 / (2.0 * c.big_a));
    if (!(bracket > 0.0)) throw degenerate_log("optimal beta: bracket term is nonpositive");
    const double s = c.a_exp * rho;
    return bracket * bracket / (s * s);
}

KappaFinal kappa_final(double delta, double R, double R_G, double eta0, int d) {
    require_dim(d);
    if (!(delta > 0.0) || delta > R) throw invalid_params("kappa final: need 0 < delta <= R");
    if (!(eta0 > 0.0)) throw invalid_params("kappa final: eta0 must be positive");
    const auto c = DimensionalConstants::make(d);
    const double p48 = std::pow(48.0, d);
    KappaFinal out;
    out.C = 0.5 * c.c_mu0;
    out.b = c.bessel_zero * c.bessel_zero;
    out.a = 32.0 * c.a_prime / p48;
    out.c = 0.5 * c.c_prime / p48;
    const double density = std::pow(delta, d - 2.0) / std::pow(R, d);
    out.I_max = out.C * eta0 * density;
    const double r_eff = std::min(R, R_G);
    out.bracket = out.b / (r_eff * r_eff) + std::abs(std::log(out.a * density));
    out.kappa = out.c * std::pow(delta / R, d) / (out.bracket * out.bracket);
    return out;
}

const char* regime_name(Regime r) {
    switch (r) {
    case Regime::fading: return "fading";
    case Regime::nonfading: return "nonfading";
    case Regime::solid: return "solid";
    }
    return "?";
}

BoundReport evaluate_bound(const std::string& name, const std::map<std::string, double>& args) {
    BoundReport rep;
    rep.name = name;
    rep.inputs = args;

    auto need = [&](const std::string& key) -> double {
        const auto it = args.find(key);
        if (it == args.end()) throw invalid_params(name + ": missing argument '" + key + "'");
        return it->second;
    };
    auto maybe = [&](const std::string& key) -> std::optional<double> {
        const auto it = args.find(key);
        return it == args.end() ? std::nullopt : std::optional<double>(it->second);
    };
    const int d = static_cast<int>(need("d"));

    if (name == "annulus_bounds") {
        const auto r = annulus_bounds(need("rho"), need("R"), d, maybe("vol_g"));
        rep.value = r.lower;
        rep.units = "1/length^2";
        if (r.upper) rep.extra["upper"] = *r.upper;
    } else if (name == "ballpool_lower") {
        rep.value = ballpool_lower(need("rho"), need("ell"), d);
        rep.units = "1/length^2";
    } else if (name == "general_lower") {
        rep.value = general_lower(need("rho"), need("R"), d);
        rep.units = "1/length^2";
    } else if (name == "davies_comparison") {
        rep.value = davies_comparison(need("rho"), need("R"), d);
        rep.units = "1/length^2";
        rep.notes.push_back("unit prefactor; meaningful only in ratios");
    } else if (name == "hit_and_run_bound") {
        rep.value = hit_and_run_bound(need("rho"), need("alpha"), d);
        rep.units = "";
    } else if (name == "semigroup_diff_bound") {
        rep.value = semigroup_diff_bound(need("rho"), need("beta"), d);
        rep.units = "";
    } else if (name == "ball_dirichlet_eigenvalue") {
        rep.value = ball_dirichlet_eigenvalue(need("R"), d);
        rep.units = "1/length^2";
    } else if (name == "capacity_upper") {
        rep.value = capacity_upper(need("r"), d);
        rep.units = "";
    } else if (name == "kappa_first_step") {
        const auto r = kappa_first_step(need("delta"), need("R"), need("lambda_omega"),
                                        need("t"), d);
        rep.value = r.kappa_t;
        rep.units = "";
        rep.extra["mu0_lower"] = r.mu0_lower;
        rep.extra["E_t"] = r.E_t;
        rep.extra["bracket"] = r.bracket;
    } else if (name == "optimal_beta") {
        rep.value = optimal_beta(need("rho"), need("mu0"), need("lambda_omega"), need("t"), d);
        rep.units = "1/length^2";
    } else if (name == "kappa_final") {
        const auto r = kappa_final(need("delta"), need("R"),
                                   maybe("r_g") ? *maybe("r_g")
                                                : std::numeric_limits<double>::infinity(),
                                   maybe("eta0") ? *maybe("eta0") : 1.0, d);
        rep.value = r.kappa;
        rep.units = "";
        rep.extra["I_max"] = r.I_max;
        rep.extra["C"] = r.C;
        rep.extra["a"] = r.a;
        rep.extra["b"] = r.b;
        rep.extra["c"] = r.c;
        rep.extra["bracket"] = r.bracket;
    } else if (name == "constants") {
        const auto c = DimensionalConstants::make(d);
        rep.value = c.c_mu0;
        rep.units = "";
        rep.extra["omega_d"] = c.omega_d;
        rep.extra["bessel_zero"] = c.bessel_zero;
        rep.extra["A"] = c.big_a;
        rep.extra["c_prime"] = c.c_prime;
        rep.extra["a_prime"] = c.a_prime;
        rep.extra["a_exp"] = c.a_exp;
    } else {
        throw invalid_params("unknown bound '" + name + "'");
    }
    return rep;
}

} // namespace ucp::bounds
