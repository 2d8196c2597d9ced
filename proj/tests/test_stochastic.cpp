#include <doctest.h>

#include <cmath>

#include "ucp/bounds.hpp"
#include "ucp/errors.hpp"
#include "ucp/grid.hpp"
#include "ucp/operators.hpp"
#include "ucp/parallel.hpp"
#include "ucp/spectral.hpp"
#include "ucp/stochastic.hpp"

using namespace ucp;
using namespace ucp::stochastic;

namespace {
Point pt(double x, double y, double z) { return Point{x, y, z}; }
} // namespace

TEST_CASE("paths: empty obstacle set never hits, empty B never occupies") {
    const auto G = ConvexDomain::box(pt(-1, -1, -1), pt(1, 1, 1));
    PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_paths = 64;
    cfg.seed = 5;
    cfg.start = pt(0, 0, 0);
    const auto outs = simulate_paths(G, BallUnion(3), BallUnion(3), cfg);
    REQUIRE(outs.size() == 64);
    for (const auto& o : outs) {
        CHECK_FALSE(o.hit_S);
        CHECK(o.occupation_T == 0.0);
    }
}

TEST_CASE("paths: start inside S hits at time zero") {
    const auto G = ConvexDomain::box(pt(-1, -1, -1), pt(1, 1, 1));
    BallUnion S(3);
    S.add(pt(0, 0, 0), 0.25);
    PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_paths = 16;
    cfg.seed = 6;
    cfg.start = pt(0.1, 0, 0);
    const auto outs = simulate_paths(G, S, S.fattened(0.1), cfg);
    for (const auto& o : outs) {
        CHECK(o.hit_S);
        CHECK(o.first_hit_time == 0.0);
    }
}

TEST_CASE("paths: outcomes stay within physical ranges") {
    const auto G = ConvexDomain::ball(pt(0, 0, 0), 1.0);
    BallUnion S(3);
    S.add(pt(0, 0, 0), 0.2);
    PathConfig cfg;
    cfg.dt = 4e-4;
    cfg.n_paths = 256;
    cfg.seed = 7;
    cfg.start = pt(0.6, 0, 0);
    const auto outs = simulate_paths(G, S, S.fattened(0.2), cfg);
    for (const auto& o : outs) {
        CHECK(o.occupation_T >= 0.0);
        CHECK(o.occupation_T <= cfg.horizon + 1e-12);
        if (o.hit_S) CHECK(o.first_hit_time <= cfg.horizon + 1e-12);
    }
}

TEST_CASE("paths: deterministic across thread counts") {
    const auto G = ConvexDomain::box(pt(-2, -2, -2), pt(2, 2, 2));
    BallUnion S(3);
    S.add(pt(0.5, 0, 0), 0.3);
    PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_paths = 2000;
    cfg.seed = 11;
    cfg.start = pt(-0.5, 0, 0);

    ThreadPool::set_threads(1);
    const auto a = simulate_paths(G, S, S.fattened(0.2), cfg);
    ThreadPool::set_threads(2);
    const auto b = simulate_paths(G, S, S.fattened(0.2), cfg);
    ThreadPool::set_threads(0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].hit_S == b[i].hit_S);
        CHECK(a[i].occupation_T == b[i].occupation_T);
        CHECK(a[i].reflections == b[i].reflections);
    }
}

TEST_CASE("paths: monotone hit fraction under obstacle growth (coupled seeds)") {
    const auto G = ConvexDomain::box(pt(-2, -2, -2), pt(2, 2, 2));
    BallUnion S1(3);
    S1.add(pt(0.6, 0, 0), 0.2);
    BallUnion S2 = S1;
    S2.add(pt(-0.6, 0, 0), 0.25);
    PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_paths = 4000;
    cfg.seed = 13;
    cfg.start = pt(0, 0, 0);
    const auto a = simulate_paths(G, S1, BallUnion(3), cfg);
    const auto b = simulate_paths(G, S2, BallUnion(3), cfg);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].hit_S) CHECK(b[i].hit_S); // same trajectory, larger target
}

TEST_CASE("paths: halfspace reflection is unsupported") {
    const auto G = ConvexDomain::halfspaces({{pt(1, 0, 0), 1.0}}, pt(0, 0, 0));
    PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_paths = 1;
    cfg.start = pt(0, 0, 0);
    CHECK_THROWS_AS(simulate_paths(G, BallUnion(3), BallUnion(3), cfg), unsupported_reflection);
}

TEST_CASE("hit-and-run: alpha at the horizon reduces to the plain hit fraction") {
    const auto G = ConvexDomain::box(pt(-3, -3, -3), pt(3, 3, 3));
    BallUnion S(3);
    S.add(pt(0, 0, 0), 0.4);
    const double rho = 0.3;
    const auto B = S.fattened(rho);
    PathConfig cfg;
    cfg.dt = 5e-4;
    cfg.n_paths = 3000;
    cfg.seed = 17;
    cfg.start = pt(1.0, 0, 0);

    const auto hr = estimate_hit_and_run(G, S, B, rho, 1.0, cfg);
    const auto outs = simulate_paths(G, S, B, cfg);
    double frac = 0.0;
    for (const auto& o : outs) frac += o.hit_S;
    frac /= static_cast<double>(outs.size());
    CHECK(hr.estimate.value == doctest::Approx(frac).epsilon(1e-12));
    CHECK(hr.paper_bound ==
          doctest::Approx(bounds::hit_and_run_bound(rho, 1.0, 3)).epsilon(1e-12));
}

TEST_CASE("hit-and-run: empty obstacle set gives exactly zero") {
    const auto G = ConvexDomain::box(pt(-1, -1, -1), pt(1, 1, 1));
    PathConfig cfg;
    cfg.dt = 1e-4;
    cfg.n_paths = 500;
    cfg.seed = 19;
    cfg.start = pt(0, 0, 0);
    const auto hr = estimate_hit_and_run(G, BallUnion(3), BallUnion(3), 0.5, 0.5, cfg);
    CHECK(hr.estimate.value == 0.0);
}

TEST_CASE("hit-and-run: resolution rule and fattening precondition") {
    const auto G = ConvexDomain::box(pt(-1, -1, -1), pt(1, 1, 1));
    BallUnion S(3);
    S.add(pt(0, 0, 0), 0.2);
    PathConfig cfg;
    cfg.dt = 1e-2; // too coarse for rho = 0.3
    cfg.n_paths = 8;
    cfg.start = pt(0.5, 0, 0);
    CHECK_THROWS_AS(estimate_hit_and_run(G, S, S.fattened(0.3), 0.3, 0.5, cfg), invalid_params);
    cfg.dt = 1e-4;
    CHECK_THROWS_AS(estimate_hit_and_run(G, S, S.fattened(0.2), 0.3, 0.5, cfg), invalid_params);
}

TEST_CASE("hit-and-run: wall crossing within tiny occupation is rare (paper bound holds)") {
    // thick wall, small alpha: the estimate minus 2 CI stays below the bound
    const auto G = ConvexDomain::whole_space(pt(-8, -8, -8), pt(8, 8, 8));
    BallUnion S(3);
    S.add(pt(0, 0, 0), 0.5);
    const double rho = 1.0;
    const auto B = S.fattened(rho);
    PathConfig cfg;
    cfg.dt = 1e-3; // rho^2/100 = 1e-2, fine
    cfg.n_paths = 20000;
    cfg.seed = 23;
    cfg.start = pt(2.0, 0, 0);
    const auto hr = estimate_hit_and_run(G, S, B, rho, 0.01, cfg);
    CHECK(hr.estimate.value - 2.0 * hr.estimate.ci_halfwidth <= hr.paper_bound);
    CHECK(hr.estimate.value < 0.01); // events are genuinely rare
}

TEST_CASE("feynman-kac: conservative process and killing at the start") {
    const auto G = ConvexDomain::box(pt(-1, -1, -1), pt(1, 1, 1));
    PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_paths = 400;
    cfg.seed = 29;
    cfg.start = pt(0, 0, 0);
    const auto one = feynman_kac(G, BallUnion(3), BallUnion(3), 0.0,
                                 [](std::span<const double>) { return 1.0; }, cfg, false);
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(one.ci_halfwidth == doctest::Approx(0.0).epsilon(1e-15));

    BallUnion S(3);
    S.add(pt(0, 0, 0), 0.2);
    PathConfig cfg2 = cfg;
    cfg2.start = pt(0.1, 0, 0); // inside S
    const auto dead = feynman_kac(G, S, S.fattened(0.1), 1.0,
                                  [](std::span<const double>) { return 1.0; }, cfg2, true);
    CHECK(dead.value == 0.0);
}

TEST_CASE("feynman-kac: unbounded sampler is rejected") {
    const auto G = ConvexDomain::box(pt(-1, -1, -1), pt(1, 1, 1));
    PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_paths = 4;
    cfg.start = pt(0, 0, 0);
    CHECK_THROWS_AS(feynman_kac(G, BallUnion(3), BallUnion(3), 0.0,
                                [](std::span<const double> x) { return 1.0 / (x[0] * x[0] + 1e-300); },
                                cfg, false),
                    invalid_params);
}

TEST_CASE("feynman-kac agrees with the discrete heat semigroup") {
    // box with a centered potential ball, beta = 10: compare the path
    // estimate at x0 with exp(-t H_beta) f read off the grid
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    BallUnion B(3);
    B.add(pt(0.5, 0.5, 0.5), 0.25);
    const double beta = 10.0;
    const Point x0 = pt(0.25, 0.25, 0.25);

    PathConfig cfg;
    cfg.dt = 2.5e-4;
    cfg.n_paths = 60000;
    cfg.seed = 31;
    cfg.start = x0;
    const auto mc = feynman_kac(G, BallUnion(3), B, beta,
                                [](std::span<const double>) { return 1.0; }, cfg, false);

    const double h = 1.0 / 20.0;
    const auto g = classify_grid(G, BallUnion(3), h);
    const auto H = assemble_laplacian(g, beta, B);
    spectral::HeatActionParams hp;
    hp.t = 1.0;
    hp.tolerance = 1e-8;
    std::vector<double> f(static_cast<std::size_t>(H.n), 1.0), out(static_cast<std::size_t>(H.n));
    spectral::apply_heat(H, hp, f, out);
    // nearest dof to x0
    std::int64_t best = 0;
    double bd = 1e300;
    for (std::int64_t dof = 0; dof < g.n_dofs; ++dof) {
        const Point x = g.node_coord(g.node_of_dof[static_cast<std::size_t>(dof)]);
        const double d = dist2_sq(x, x0);
        if (d < bd) {
            bd = d;
            best = dof;
        }
    }
    const double grid_value = out[static_cast<std::size_t>(best)];
    CHECK(std::abs(mc.value - grid_value) <= 2.0 * mc.ci_halfwidth + 0.03);
}

TEST_CASE("semigroup gap: beta zero reduces to the hitting probability") {
    const auto G = ConvexDomain::ball(pt(0, 0, 0), 1.0);
    BallUnion S(3);
    S.add(pt(0, 0, 0), 0.25);
    const double rho = 0.25;
    const auto B = S.fattened(rho);
    PathConfig cfg;
    cfg.dt = 5e-4;
    cfg.n_paths = 4000;
    cfg.seed = 37;
    cfg.start = pt(0.7, 0, 0);

    const auto gap = estimate_semigroup_gap(G, S, B, rho, 0.0, {pt(0.7, 0, 0)}, cfg);
    const auto outs = simulate_paths(G, S, B, cfg);
    double frac = 0.0;
    for (const auto& o : outs) frac += o.hit_S;
    frac /= static_cast<double>(outs.size());
    CHECK(gap.max_estimate.value == doctest::Approx(frac).epsilon(1e-12));
}

TEST_CASE("semigroup gap: estimates stay in [0,1] and report the worst start") {
    const auto G = ConvexDomain::ball(pt(0, 0, 0), 1.0);
    BallUnion S(3);
    S.add(pt(0, 0, 0), 0.25);
    const double rho = 0.25;
    const auto B = S.fattened(rho);
    PathConfig cfg;
    cfg.dt = 5e-4;
    cfg.n_paths = 2000;
    cfg.seed = 41;
    cfg.start = pt(0, 0, 0);
    const std::vector<Point> starts = {pt(0, 0, 0), pt(0.4, 0, 0), pt(0.9, 0, 0)};
    const auto gap = estimate_semigroup_gap(G, S, B, rho, 400.0, starts, cfg);
    REQUIRE(gap.per_start.size() == 3);
    for (const auto& e : gap.per_start) {
        CHECK(e.value >= 0.0);
        CHECK(e.value <= 1.0);
    }
    CHECK(gap.max_estimate.value ==
          doctest::Approx(gap.per_start[gap.argmax].value).epsilon(1e-15));
    CHECK(gap.alpha_star == doctest::Approx(rho / (4.0 * std::sqrt(2.0) * 20.0)).epsilon(1e-12));
}

TEST_CASE("dt refinement: hitting estimates agree within joint confidence") {
    const auto G = ConvexDomain::whole_space(pt(-10, -10, -10), pt(10, 10, 10));
    BallUnion S(3);
    S.add(pt(0, 0, 0), 0.2);
    PathConfig coarse;
    coarse.dt = 2e-3;
    coarse.n_paths = 20000;
    coarse.seed = 43;
    coarse.start = pt(1.0, 0, 0);
    PathConfig fine = coarse;
    fine.dt = 2e-4;
    fine.seed = 44;

    auto frac = [&](const PathConfig& cfg) {
        const auto outs = simulate_paths(G, S, BallUnion(3), cfg);
        double s = 0.0;
        for (const auto& o : outs) s += o.hit_S;
        const double p = s / static_cast<double>(outs.size());
        return std::make_pair(p, proportion_ci_halfwidth(p, outs.size()));
    };
    const auto [pc, cc] = frac(coarse);
    const auto [pf, cf] = frac(fine);
    // endpoint detection introduces an O(sqrt(dt)) bias; the joint window
    // below allows for it alongside both confidence intervals
    CHECK(std::abs(pc - pf) <= cc + cf + 3.5 * (std::sqrt(coarse.dt) - std::sqrt(fine.dt)));
    // coarse stepping misses excursions, so it can only undercount hits
    CHECK(pc <= pf + cc + cf);
}

TEST_CASE("proportion CI: normal and Wilson regimes") {
    CHECK(proportion_ci_halfwidth(0.5, 10000) == doctest::Approx(0.0098).epsilon(1e-2));
    const double w = proportion_ci_halfwidth(0.0, 1000000);
    CHECK(w > 0.0);
    CHECK(w < 1e-5);
}
