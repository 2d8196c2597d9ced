#include <doctest.h>

#include <cmath>

#include "ucp/bounds.hpp"
#include "ucp/errors.hpp"
#include "ucp/rng.hpp"

using namespace ucp;
using namespace ucp::bounds;

TEST_CASE("dimensional constants") {
    const auto c3 = DimensionalConstants::make(3);
    CHECK(c3.omega_d == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-12));
    CHECK(c3.bessel_zero == doctest::Approx(M_PI).epsilon(1e-12));
    CHECK(c3.big_a * c3.big_a == doctest::Approx(1.0 + std::pow(2.0, 3.5)).epsilon(1e-15));
    CHECK(c3.c_prime * 256.0 == doctest::Approx(c3.c_mu0).epsilon(1e-15));
    CHECK(c3.c_mu0 == doctest::Approx(3.0 / 5832.0).epsilon(1e-15));
    CHECK(c3.a_exp == doctest::Approx(1.0 / (4.0 * std::sqrt(2.0))).epsilon(1e-15));

    const auto c4 = DimensionalConstants::make(4);
    CHECK(c4.bessel_zero == doctest::Approx(3.8317059702075).epsilon(1e-10));
    const auto c5 = DimensionalConstants::make(5);
    // first zero of J_{3/2} solves tan z = z
    CHECK(std::tan(c5.bessel_zero) == doctest::Approx(c5.bessel_zero).epsilon(1e-8));

    CHECK_THROWS_AS(DimensionalConstants::make(2), invalid_params);
}

TEST_CASE("annulus bounds: values and scaling") {
    const auto r = annulus_bounds(0.1, 1.0, 3, 4.0 * M_PI / 3.0);
    CHECK(r.lower == doctest::Approx(0.3).epsilon(1e-12));
    REQUIRE(r.upper.has_value());
    CHECK(*r.upper == doctest::Approx(0.80645161290322581).epsilon(1e-9));

    // d = 4 with vol_G = omega_4 * 16: lower = 8 * rho^2 / R^4
    const auto r4 = annulus_bounds(0.5, 1.0, 4, std::pow(M_PI, 2.0) / 2.0 * 16.0);
    CHECK(r4.lower == doctest::Approx(2.0).epsilon(1e-12));

    // scale invariance: (rho,R) -> (s rho, s R) scales the lower bound by s^-2
    auto gen = rng::stream(11, 0);
    for (int i = 0; i < 20; ++i) {
        const double rho = 0.05 + 0.2 * gen.next_uniform();
        const double R = 1.0 + gen.next_uniform();
        const double s = 0.5 + 2.0 * gen.next_uniform();
        const double a = annulus_bounds(rho, R, 3).lower;
        const double b = annulus_bounds(s * rho, s * R, 3).lower;
        CHECK(b == doctest::Approx(a / (s * s)).epsilon(1e-12));
    }

    // rho -> 0 monotone decrease to 0
    double prev = annulus_bounds(0.4, 1.0, 3).lower;
    for (double rho = 0.2; rho > 1e-6; rho *= 0.5) {
        const double v = annulus_bounds(rho, 1.0, 3).lower;
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-5);

    CHECK_THROWS_AS(annulus_bounds(1.0, 1.0, 3), invalid_params);
    CHECK_THROWS_AS(annulus_bounds(0.4, 1.0, 3, 0.1), invalid_params); // vol too small
}

TEST_CASE("ball pool bound") {
    CHECK(ballpool_lower(0.1, 1.0, 3) == doctest::Approx(0.057735026918962576).epsilon(1e-12));
    CHECK(ballpool_lower(0.1, 2.0, 3) ==
          doctest::Approx(0.057735026918962576 / 8.0).epsilon(1e-12));
    CHECK_THROWS_AS(ballpool_lower(0.5, 1.0, 3), invalid_params);
}

TEST_CASE("general bound and the Davies comparison") {
    CHECK(general_lower(0.1, 1.0, 3) == doctest::Approx(0.1 / 9.0).epsilon(1e-12));
    CHECK(general_lower(1.0, 1.0, 5) == doctest::Approx(15.0 / 243.0).epsilon(1e-12));

    // exact factor 3^-d against the annulus lower bound
    auto gen = rng::stream(12, 0);
    for (int i = 0; i < 20; ++i) {
        const double rho = 0.01 + 0.3 * gen.next_uniform();
        const double R = 1.0 + gen.next_uniform();
        const int d = 3 + static_cast<int>(gen.next_uniform() * 3);
        CHECK(general_lower(rho, R, d) ==
              doctest::Approx(annulus_bounds(rho, R, d).lower / std::pow(3.0, d)).epsilon(1e-12));
    }

    CHECK(davies_comparison(0.1, 1.0, 3) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(davies_comparison(0.5, 2.0, 3) == doctest::Approx(0.015625).epsilon(1e-12));

    // ratio grows like R/rho
    const double q1 = general_lower(0.1, 1.0, 3) / davies_comparison(0.1, 1.0, 3);
    const double q2 = general_lower(0.01, 1.0, 3) / davies_comparison(0.01, 1.0, 3);
    CHECK(q2 == doctest::Approx(10.0 * q1).epsilon(1e-9));
}

TEST_CASE("hit-and-run bound") {
    CHECK(hit_and_run_bound(1.0, 0.01, 3) == doctest::Approx(0.021840595367939752).epsilon(1e-9));
    CHECK(hit_and_run_bound(1.0, 1.0, 3) == doctest::Approx(10.628).epsilon(1e-3));
    CHECK(hit_and_run_bound(1.0, 1.0, 3) > 1.0); // vacuous regime is allowed

    // invariance under (rho, alpha) -> (s rho, s^2 alpha)
    auto gen = rng::stream(13, 0);
    for (int i = 0; i < 20; ++i) {
        const double rho = 0.2 + gen.next_uniform();
        const double alpha = 0.01 + 0.2 * gen.next_uniform();
        const double s = 0.5 + gen.next_uniform();
        if (s * s * alpha > 1.0) continue;
        CHECK(hit_and_run_bound(s * rho, s * s * alpha, 3) ==
              doctest::Approx(hit_and_run_bound(rho, alpha, 3)).epsilon(1e-12));
    }

    // alpha -> 0 collapse
    CHECK(hit_and_run_bound(1.0, 1e-4, 3) < 1e-200);
    CHECK_THROWS_AS(hit_and_run_bound(1.0, 1.5, 3), invalid_params);
}

TEST_CASE("semigroup difference bound") {
    CHECK(semigroup_diff_bound(0.5, 1e4, 3) == doctest::Approx(5.0879e-4).epsilon(1e-3));
    CHECK(semigroup_diff_bound(0.5, 400.0, 3) == doctest::Approx(0.59925).epsilon(1e-3));

    // invariance under (rho, beta) -> (s rho, beta / s^2)
    auto gen = rng::stream(14, 0);
    for (int i = 0; i < 20; ++i) {
        const double rho = 0.2 + gen.next_uniform();
        const double beta = 10.0 + 1e3 * gen.next_uniform();
        const double s = 0.5 + gen.next_uniform();
        CHECK(semigroup_diff_bound(s * rho, beta / (s * s), 3) ==
              doctest::Approx(semigroup_diff_bound(rho, beta, 3)).epsilon(1e-12));
    }

    // beta -> infinity collapse
    CHECK(semigroup_diff_bound(0.5, 1e12, 3) < 1e-300);
}

TEST_CASE("ball Dirichlet eigenvalue") {
    CHECK(ball_dirichlet_eigenvalue(1.0, 3) == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-12));
    CHECK(ball_dirichlet_eigenvalue(2.0, 3) == doctest::Approx(M_PI * M_PI / 8.0).epsilon(1e-12));
    CHECK(ball_dirichlet_eigenvalue(1.0, 5) == doctest::Approx(10.0954).epsilon(1e-4));
}

TEST_CASE("capacity upper bound") {
    const double omega3 = 4.0 * M_PI / 3.0;
    CHECK(capacity_upper(0.1, 3) ==
          doctest::Approx(omega3 * 7.0 * 0.1 + omega3 * 8.0 * 1e-3).epsilon(1e-12));
    // r -> 0 limit and the leading-order constant
    CHECK(capacity_upper(1e-8, 3) < 1e-6);
    CHECK(capacity_upper(1e-3, 3) / 1e-3 == doctest::Approx(omega3 * 7.0).epsilon(1e-2));
}

TEST_CASE("homogenization regimes") {
    std::vector<double> rhos, Rs;
    for (int n = 1; n <= 20; ++n) {
        rhos.push_back(1.0 / n);
        Rs.push_back(1.0 / n);
    }
    CHECK(homogenization_regime(rhos, Rs, 3).regime == Regime::solid);

    rhos.clear();
    for (int n = 1; n <= 20; ++n) rhos.push_back(std::pow(1.0 / n, 3));
    CHECK(homogenization_regime(rhos, Rs, 3).regime == Regime::nonfading);

    rhos.clear();
    for (int n = 1; n <= 20; ++n) rhos.push_back(std::pow(1.0 / n, 4));
    const auto fade = homogenization_regime(rhos, Rs, 3);
    CHECK(fade.regime == Regime::fading);
    REQUIRE(fade.sequence.size() == 20);
    CHECK(fade.sequence[0] == doctest::Approx(1.0));
    CHECK(fade.sequence[19] == doctest::Approx(1.0 / 20.0).epsilon(1e-12));
}

TEST_CASE("kappa first step") {
    const auto k = kappa_first_step(0.2, 2.0, 1.0, 0.5, 3);
    CHECK(k.mu0_lower == doctest::Approx(1.2860082304526749e-5).epsilon(1e-9));
    CHECK(k.E_t == doctest::Approx(6.430041152263374e-6).epsilon(1e-9));
    CHECK(k.bracket == doctest::Approx(14.903).epsilon(1e-4));
    CHECK(k.kappa_t == doctest::Approx(4.5236e-12).epsilon(1e-4));

    // t -> 1: kappa -> 0, E -> mu0
    const auto near1 = kappa_first_step(0.2, 2.0, 1.0, 1.0 - 1e-9, 3);
    CHECK(near1.kappa_t < 1e-18);
    CHECK(near1.E_t == doctest::Approx(k.mu0_lower).epsilon(1e-6));

    // doubling lambda_Omega strictly decreases kappa_t, E unchanged
    const auto k2 = kappa_first_step(0.2, 2.0, 2.0, 0.5, 3);
    CHECK(k2.kappa_t < k.kappa_t);
    CHECK(k2.E_t == doctest::Approx(k.E_t).epsilon(1e-15));

    // kappa_t strictly increasing in delta at fixed R, lambda, t
    double prev = 0.0;
    for (double delta = 0.05; delta <= 0.4; delta += 0.05) {
        const double v = kappa_first_step(delta, 2.0, 1.0, 0.5, 3).kappa_t;
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("optimal beta") {
    const double beta0 = optimal_beta(0.1, 1.2860082304526749e-5, 1.0, 0.5, 3);
    CHECK(beta0 == doctest::Approx(7.107e5).epsilon(1e-3));
    // rho doubled -> beta quartered
    CHECK(optimal_beta(0.2, 1.2860082304526749e-5, 1.0, 0.5, 3) ==
          doctest::Approx(beta0 / 4.0).epsilon(1e-12));
    // mu0 -> 0 divergence
    CHECK(optimal_beta(0.1, 1e-30, 1.0, 0.5, 3) > beta0);
}

TEST_CASE("kappa final: infinity handling and asymptotics") {
    const auto inf = std::numeric_limits<double>::infinity();
    const auto a = kappa_final(0.1, 1.0, inf, 1.0, 3);
    const auto b = kappa_final(0.1, 1.0, 1e9, 1.0, 3);
    CHECK(a.kappa == doctest::Approx(b.kappa).epsilon(1e-9)); // R wedge R_G = R either way
    CHECK(a.I_max == doctest::Approx(0.5 * (3.0 / 5832.0) * 0.1).epsilon(1e-12));

    // fixed R: kappa ~ delta^d / log^2(delta) as delta -> 0
    double q_prev = 0.0;
    for (double delta : {1e-3, 1e-4, 1e-5, 1e-6}) {
        const auto k = kappa_final(delta, 1.0, inf, 1.0, 3);
        const double lg = std::abs(std::log(k.a * delta));
        const double q = k.kappa * lg * lg / std::pow(delta, 3);
        if (q_prev != 0.0) CHECK(q == doctest::Approx(q_prev).epsilon(0.2));
        q_prev = q;
    }

    // fixed delta: kappa ~ 1/(R^d log^2 R) as R -> infinity
    double w_prev = 0.0;
    for (double R : {1e3, 1e4, 1e5}) {
        const auto k = kappa_final(1.0, R, inf, 1.0, 3);
        const double lg = std::log(R);
        const double w = k.kappa * std::pow(R, 3) * lg * lg;
        if (w_prev != 0.0) CHECK(w == doctest::Approx(w_prev).epsilon(0.25));
        w_prev = w;
    }
}

TEST_CASE("bound values are nonnegative and finite on the precondition set") {
    auto gen = rng::stream(15, 0);
    for (int i = 0; i < 50; ++i) {
        const int d = 3 + static_cast<int>(gen.next_uniform() * 3);
        const double rho = 1e-3 + 0.3 * gen.next_uniform();
        const double R = rho + 0.5 + gen.next_uniform();
        for (double v : {annulus_bounds(rho, R, d).lower, general_lower(rho, R, d),
                         davies_comparison(rho, R, d),
                         hit_and_run_bound(rho, 0.01 + 0.9 * gen.next_uniform(), d),
                         semigroup_diff_bound(rho, 1.0 + 1e4 * gen.next_uniform(), d),
                         ball_dirichlet_eigenvalue(R, d), capacity_upper(rho, d)}) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
    }
}

TEST_CASE("evaluate_bound dispatch errors") {
    CHECK_THROWS_AS(evaluate_bound("nope", {{"d", 3}}), invalid_params);
    CHECK_THROWS_AS(evaluate_bound("ballpool_lower", {{"d", 3}}), invalid_params);
}
