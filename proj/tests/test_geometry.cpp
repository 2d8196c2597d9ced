#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ucp/errors.hpp"
#include "ucp/geometry.hpp"
#include "ucp/rng.hpp"

using namespace ucp;

namespace {

// independent brute-force denseness oracle over the same sample grid
bool naive_dense(const BallUnion& B, const ConvexDomain& G, double R, double delta,
                 double spacing) {
    Point lo, hi;
    G.sampling_box(lo, hi);
    const int d = G.dim();
    std::vector<long> steps(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i)
        steps[static_cast<std::size_t>(i)] =
            static_cast<long>(std::floor((hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]) / spacing + 1e-12)) + 1;
    std::vector<long> idx(static_cast<std::size_t>(d), 0);
    Point x(static_cast<std::size_t>(d));
    for (;;) {
        for (int i = 0; i < d; ++i)
            x[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)] + spacing * idx[static_cast<std::size_t>(i)];
        if (G.contains(x)) {
            bool ok = false;
            for (std::size_t b = 0; b < B.size(); ++b) {
                if (B.radii[b] < delta) continue;
                if (dist2(x, B.centers[b]) + delta <= R) {
                    ok = true;
                    break;
                }
            }
            if (!ok) return false;
        }
        int a = d - 1;
        while (a >= 0 && ++idx[static_cast<std::size_t>(a)] >= steps[static_cast<std::size_t>(a)]) {
            idx[static_cast<std::size_t>(a)] = 0;
            --a;
        }
        if (a < 0) break;
    }
    return true;
}

Point pt(double x, double y, double z) { return Point{x, y, z}; }

} // namespace

TEST_CASE("relative denseness: single ball in a box") {
    BallUnion B(3);
    B.add(pt(0, 0, 0), 0.2);
    const auto G = ConvexDomain::box(pt(-1, -1, -1), pt(1, 1, 1));

    const auto ok = check_relative_denseness(B, G, 2.2, 0.2, 0.05);
    CHECK(ok.verified);
    CHECK(ok.margin <= 0.0);

    const auto bad = check_relative_denseness(B, G, 1.0, 0.2, 0.05);
    CHECK_FALSE(bad.verified);
    // worst point sits near a box corner
    for (double c : bad.worst_point) CHECK(std::abs(c) > 0.8);
}

TEST_CASE("relative denseness: lattice of balls, exhaustive oracle") {
    BallUnion B(3);
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j)
            for (int k = -2; k <= 2; ++k) B.add(pt(i, j, k), 0.1);
    const auto G = ConvexDomain::box(pt(-1.5, -1.5, -1.5), pt(1.5, 1.5, 1.5));
    const double R = std::sqrt(3.0) + 0.1 + 0.01;

    const auto cert = check_relative_denseness(B, G, R, 0.1, 0.05);
    CHECK(cert.verified);
    CHECK(naive_dense(B, G, R, 0.1, 0.05));

    // tight R fails both routes identically
    const double R_tight = std::sqrt(3.0) * 0.5;
    const auto tight = check_relative_denseness(B, G, R_tight, 0.1, 0.05);
    CHECK(tight.verified == naive_dense(B, G, R_tight, 0.1, 0.05));
}

TEST_CASE("relative denseness: monotone under adding balls") {
    auto gen = rng::stream(2024, 0);
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(2, 2, 2));
    for (int trial = 0; trial < 5; ++trial) {
        BallUnion B(3);
        for (int i = 0; i < 6; ++i)
            B.add(pt(2 * gen.next_uniform(), 2 * gen.next_uniform(), 2 * gen.next_uniform()), 0.15);
        const double R = 1.0 + gen.next_uniform();
        const auto before = check_relative_denseness(B, G, R, 0.1, 0.05);
        BallUnion larger = B;
        larger.add(pt(1, 1, 1), 0.15);
        const auto after = check_relative_denseness(larger, G, R, 0.1, 0.05);
        if (before.verified) CHECK(after.verified);
        CHECK(after.margin <= before.margin + 1e-12);
    }
}

TEST_CASE("denseness parameter validation") {
    BallUnion B(3);
    B.add(pt(0, 0, 0), 0.2);
    const auto G = ConvexDomain::box(pt(-1, -1, -1), pt(1, 1, 1));
    CHECK_THROWS_AS(check_relative_denseness(B, G, 0.1, 0.2, 0.05), invalid_params); // delta > R
    CHECK_THROWS_AS(check_relative_denseness(B, G, 1.0, 0.2, -1.0), invalid_params);
    CHECK_THROWS_AS(check_relative_denseness(B, G, 1.0, 0.2, 0.2), invalid_params); // spacing > delta/2
}

TEST_CASE("skeleton: greedy order and rejection") {
    const double R = 0.8;
    std::vector<Point> cand = {pt(0, 0, 0), pt(R / 2, 0, 0), pt(R, 0, 0)};
    const auto s = build_skeleton(cand, R);
    REQUIRE(s.points.size() == 2);
    CHECK(s.points[0] == cand[0]);
    CHECK(s.points[1] == cand[2]);
    REQUIRE(s.rejected.size() == 1);
    CHECK(s.rejected[0] == 1);

    const auto single = build_skeleton({pt(1, 2, 3)}, 1.0);
    CHECK(single.points.size() == 1);
    CHECK(single.cover_radius == doctest::Approx(3.0));
}

TEST_CASE("skeleton: separation, cover, and maximality on the 6^3 lattice") {
    std::vector<Point> cand;
    for (int i = 0; i <= 5; ++i)
        for (int j = 0; j <= 5; ++j)
            for (int k = 0; k <= 5; ++k) cand.push_back(pt(i, j, k));
    const double R = 1.5;
    const auto s = build_skeleton(cand, R);

    for (std::size_t a = 0; a < s.points.size(); ++a)
        for (std::size_t b = a + 1; b < s.points.size(); ++b)
            CHECK(dist2(s.points[a], s.points[b]) >= R - 1e-12);

    for (const auto& c : cand) {
        double best = 1e300;
        for (const auto& p : s.points) best = std::min(best, dist2(c, p));
        CHECK(best <= 3.0 * R + 1e-12);
    }

    for (auto ri : s.rejected) {
        double best = 1e300;
        for (const auto& p : s.points) best = std::min(best, dist2(cand[ri], p));
        CHECK(best < R);
    }
}

TEST_CASE("skeleton input validation") {
    CHECK_THROWS_AS(build_skeleton({}, 1.0), invalid_params);
    CHECK_THROWS_AS(build_skeleton({pt(0, 0, 0)}, 0.0), invalid_params);
}

TEST_CASE("voronoi assignment with smallest-index ties") {
    Skeleton s;
    s.points = {pt(0, 0, 0), pt(4, 0, 0)};
    CHECK(voronoi_assign(s, pt(1, 0, 0)) == 0);
    CHECK(voronoi_assign(s, pt(2, 0, 0)) == 0); // equidistant: smaller index
    CHECK(voronoi_assign(s, pt(3, 0, 0)) == 1);
}

TEST_CASE("voronoi assignment equals exhaustive nearest neighbor") {
    auto gen = rng::stream(7, 0);
    Skeleton s;
    for (int i = 0; i < 12; ++i)
        s.points.push_back(pt(gen.next_symmetric() * 3, gen.next_symmetric() * 3,
                              gen.next_symmetric() * 3));
    for (int trial = 0; trial < 200; ++trial) {
        const Point x = pt(gen.next_symmetric() * 4, gen.next_symmetric() * 4,
                           gen.next_symmetric() * 4);
        std::size_t best = 0;
        double bd = 1e300;
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            const double d = dist2(x, s.points[i]);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        CHECK(voronoi_assign(s, x) == best);
    }
}

TEST_CASE("inradius: exact kinds and a clipped ball") {
    const auto box = ConvexDomain::box(pt(0, 0, 0), pt(2, 4, 6));
    CHECK(inradius_estimate(box).radius == doctest::Approx(1.0));

    const auto ball = ConvexDomain::ball(pt(1, 1, 1), 3.0);
    CHECK(inradius_estimate(ball).radius == doctest::Approx(3.0));

    // half-ball: unit ball cut by x1 >= 0; analytic inradius 1/2 at (1/2,0,0)
    auto half = ConvexDomain::ball(pt(0, 0, 0), 1.0);
    half.add_clip({pt(-1, 0, 0), 0.0});
    const auto r = inradius_estimate(half, 1e-5);
    CHECK(r.radius == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(r.center[0] == doctest::Approx(0.5).epsilon(2e-2));

    const auto ws = ConvexDomain::whole_space(pt(-8, -8, -8), pt(8, 8, 8));
    CHECK(std::isinf(inradius_estimate(ws).radius));
}

TEST_CASE("ball pool construction") {
    const auto centered = [](int n, double ell) {
        std::vector<std::vector<long>> gamma;
        std::vector<Point> offsets;
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j)
                for (long k = 0; k < n; ++k) {
                    gamma.push_back({i, j, k});
                    offsets.push_back(Point(3, 0.5 * ell));
                }
        return std::make_pair(gamma, offsets);
    };

    auto [g1, o1] = centered(1, 1.0);
    const auto pool1 = make_ball_pool(g1, 1.0, 0.2, o1);
    CHECK(pool1.obstacles.size() == 1);
    CHECK(pool1.covering_radius == doctest::Approx(std::sqrt(3.0)));
    CHECK(pool1.thickness == doctest::Approx(0.2));
    CHECK(pool1.region.is_full_box());

    auto [g2, o2] = centered(2, 1.0);
    const auto pool2 = make_ball_pool(g2, 1.0, 0.2, o2);
    CHECK(pool2.obstacles.size() == 8);
    // adjacent centered balls are exactly ell apart
    double dmin = 1e300;
    for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t b = a + 1; b < 8; ++b)
            dmin = std::min(dmin, dist2(pool2.obstacles.centers[a], pool2.obstacles.centers[b]));
    CHECK(dmin == doctest::Approx(1.0));

    // precondition edge: margin rho +- eps
    const double rho = 0.2, eps = 1e-6;
    std::vector<std::vector<long>> g3 = {{0, 0, 0}};
    CHECK_NOTHROW(make_ball_pool(g3, 1.0, rho, {pt(rho + eps, 0.5, 0.5)}));
    CHECK_THROWS_AS(make_ball_pool(g3, 1.0, rho, {pt(rho - eps, 0.5, 0.5)}), invalid_params);
    CHECK_THROWS_AS(make_ball_pool(g3, 1.0, 0.6, {pt(0.5, 0.5, 0.5)}), invalid_params);
}

TEST_CASE("appendix example: counts, shells, and the radius cap") {
    const auto [G, S] = make_appendix_example({0.25}, 2);
    CHECK(S.size() == 125);
    CHECK(G.is_whole_space());

    const auto radii = dyadic_shell_radii(0.25, 2);
    const auto [G2, S2] = make_appendix_example(radii, 2);
    std::map<double, int> hist;
    for (double r : S2.radii) hist[r]++;
    CHECK(hist[0.25] == 1);
    CHECK(hist[0.125] == 26);
    CHECK(hist[0.0625] == 98);

    CHECK_THROWS_AS(make_appendix_example({0.5}, 2), invalid_params);
}

TEST_CASE("domain membership uses closed sets") {
    const auto box = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    CHECK(box.contains(pt(1, 1, 1)));
    CHECK(box.contains(pt(0, 0, 0)));
    CHECK_FALSE(box.contains(pt(1.0 + 1e-9, 0.5, 0.5)));

    const auto ball = ConvexDomain::ball(pt(0, 0, 0), 1.0);
    CHECK(ball.contains(pt(1, 0, 0)));
    CHECK_FALSE(ball.contains(pt(1.0 + 1e-9, 0, 0)));

    BallUnion u(3);
    u.add(pt(0, 0, 0), 0.5);
    CHECK(u.contains(pt(0.5, 0, 0)));
    CHECK_FALSE(u.contains(pt(0.5 + 1e-12, 0, 0)));
}
