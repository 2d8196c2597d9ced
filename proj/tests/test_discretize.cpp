#include <doctest.h>

#include <cmath>

#include "ucp/errors.hpp"
#include "ucp/grid.hpp"
#include "ucp/operators.hpp"
#include "ucp/rng.hpp"
#include "ucp/spectral.hpp"

using namespace ucp;

namespace {

Point pt(double x, double y, double z) { return Point{x, y, z}; }

std::int64_t count_class(const GridDiscretization& g, NodeClass c) {
    std::int64_t n = 0;
    for (auto cls : g.node_class) n += cls == c;
    return n;
}

double dense_lambda1(const SparseSymmetricOperator& H) {
    std::vector<double> evals;
    std::vector<std::vector<double>> evecs;
    spectral::dense_eigh(H.to_dense(), H.n, evals, evecs);
    return evals.front();
}

} // namespace

TEST_CASE("classify: unit box at h = 1/2") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    const auto g = classify_grid(G, BallUnion(3), 0.5);
    CHECK(g.n_dofs == 27);
    CHECK(count_class(g, NodeClass::interior) == 1);
    CHECK(count_class(g, NodeClass::neumann_boundary) == 26);

    BallUnion S(3);
    S.add(pt(0.5, 0.5, 0.5), 0.3);
    const auto gs = classify_grid(G, S, 0.5);
    CHECK(gs.n_dofs == 26);
    CHECK(count_class(gs, NodeClass::dirichlet_removed) == 1);
}

TEST_CASE("classify: ball domain matches a brute-force lattice scan") {
    const auto G = ConvexDomain::ball(pt(0, 0, 0), 1.0);
    const double h = 0.25;
    const auto g = classify_grid(G, BallUnion(3), h);

    // independent count of lattice points with |x| <= 1 on the same grid
    std::int64_t expect = 0;
    for (std::int64_t f = 0; f < g.node_count(); ++f) {
        const Point x = g.node_coord(f);
        if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] <= 1.0 + 1e-12) ++expect;
    }
    CHECK(g.n_dofs == expect);
}

TEST_CASE("classify: invisible obstacle is rejected") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    BallUnion S(3);
    S.add(pt(0.25, 0.25, 0.25), 0.05); // between nodes at h = 1/2
    CHECK_THROWS_AS(classify_grid(G, S, 0.5), invalid_params);
}

TEST_CASE("classify: empty interior reported") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    BallUnion S(3);
    S.add(pt(0.5, 0.5, 0.5), 2.0); // swallows the whole box
    CHECK_THROWS_AS(classify_grid(G, S, 0.5), empty_interior);
}

TEST_CASE("assemble: Neumann null vector and row sums") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    const auto g = classify_grid(G, BallUnion(3), 0.25);
    const auto H = assemble_laplacian(g, 0.0, BallUnion(3));

    std::vector<double> ones(static_cast<std::size_t>(H.n), 1.0), out(static_cast<std::size_t>(H.n));
    H.mat_vec(ones, out);
    for (double v : out) CHECK(std::abs(v) < 1e-12);
    for (std::int64_t i = 0; i < H.n; ++i) CHECK(H.row_sum(i) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(H.max_asymmetry() == 0.0);
}

TEST_CASE("assemble: rows next to removed nodes have positive sums") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    BallUnion S(3);
    S.add(pt(0.5, 0.5, 0.5), 0.3);
    const auto g = classify_grid(G, S, 0.25);
    const auto H = assemble_laplacian(g, 0.0, BallUnion(3));
    std::int64_t positive = 0;
    for (std::int64_t i = 0; i < H.n; ++i) {
        const double rs = H.row_sum(i);
        CHECK(rs >= -1e-14);
        if (rs > 1e-12) ++positive;
    }
    CHECK(positive > 0); // exactly the neighbors of the removed nodes
}

TEST_CASE("assemble: two-node segment eigenvalues") {
    // box sized to keep exactly two active nodes at spacing h
    const double h = 0.5;
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(0.5, 0.1, 0.1));
    const auto g = classify_grid(G, BallUnion(3), h);
    REQUIRE(g.n_dofs == 2);
    const auto H = assemble_laplacian(g, 0.0, BallUnion(3));
    std::vector<double> evals;
    std::vector<std::vector<double>> evecs;
    spectral::dense_eigh(H.to_dense(), 2, evals, evecs);
    CHECK(evals[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(evals[1] == doctest::Approx(1.0 / (h * h)).epsilon(1e-12));
}

TEST_CASE("assemble: full-cover potential shifts the spectrum exactly") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    const auto g = classify_grid(G, BallUnion(3), 0.5);
    BallUnion cover(3);
    cover.add(pt(0.5, 0.5, 0.5), 10.0);
    const auto H0 = assemble_laplacian(g, 0.0, BallUnion(3));
    const auto H10 = assemble_laplacian(g, 10.0, cover);
    CHECK(dense_lambda1(H10) == doctest::Approx(dense_lambda1(H0) + 10.0).epsilon(1e-12));
}

TEST_CASE("divergence form: identity reduction is entry-identical") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    BallUnion S(3);
    S.add(pt(0.5, 0.5, 0.5), 0.3);
    const auto g = classify_grid(G, S, 0.25);
    const auto Hl = assemble_laplacian(g, 0.0, BallUnion(3));
    const auto Hd = assemble_divergence_form(g, identity_coefficients(3), 1.0, 0.0, BallUnion(3));
    REQUIRE(Hd.n == Hl.n);
    REQUIRE(Hd.nnz() == Hl.nnz());
    for (std::size_t k = 0; k < Hd.val.size(); ++k) {
        CHECK(Hd.col[k] == Hl.col[k]);
        CHECK(Hd.val[k] == doctest::Approx(Hl.val[k]).epsilon(1e-15));
    }

    const auto H2 = assemble_divergence_form(
        g, scalar_coefficients(3, [](std::span<const double>) { return 2.0; }), 1.0, 0.0,
        BallUnion(3));
    for (std::size_t k = 0; k < H2.val.size(); ++k)
        CHECK(H2.val[k] == doctest::Approx(2.0 * Hl.val[k]).epsilon(1e-15));
}

TEST_CASE("divergence form: checkerboard dominates the Laplacian") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    const auto g = classify_grid(G, BallUnion(3), 1.0 / 6.0);
    const auto checker = scalar_coefficients(3, [](std::span<const double> x) {
        long s = 0;
        for (double c : x) s += static_cast<long>(std::floor(c * 3.0));
        return (s % 2 == 0) ? 1.0 : 4.0;
    });
    const auto Ha = assemble_divergence_form(g, checker, 1.0, 0.0, BallUnion(3));
    const auto Hl = assemble_laplacian(g, 0.0, BallUnion(3));
    CHECK(Ha.max_asymmetry() == 0.0);

    // smallest eigenvalue of the difference H_a - H_l is >= -1e-10
    auto diff = Ha;
    // subtract the Laplacian entries (the identity-reduction test guarantees
    // matching sparsity for the diagonal part; checker has no cross terms)
    REQUIRE(diff.nnz() == Hl.nnz());
    for (std::size_t k = 0; k < diff.val.size(); ++k) diff.val[k] -= Hl.val[k];
    CHECK(dense_lambda1(diff) >= -1e-10);
}

TEST_CASE("divergence form: full tensor stays symmetric and PSD") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    const auto g = classify_grid(G, BallUnion(3), 0.25);
    const CoefficientField field = [](std::span<const double> x, std::span<double> a) {
        // smooth symmetric field with modest off-diagonal coupling
        const double c = 0.3 * std::sin(x[0] + x[1]);
        a[0] = 2.0; a[1] = c;   a[2] = 0.0;
        a[3] = c;   a[4] = 2.0; a[5] = 0.1;
        a[6] = 0.0; a[7] = 0.1; a[8] = 1.5;
    };
    const auto H = assemble_divergence_form(g, field, 1.0, 0.0, BallUnion(3));
    CHECK(H.max_asymmetry() == 0.0);
    CHECK(dense_lambda1(H) >= -1e-10);
}

TEST_CASE("divergence form: ellipticity violation is reported") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    const auto g = classify_grid(G, BallUnion(3), 0.5);
    const auto bad = scalar_coefficients(3, [](std::span<const double>) { return 0.5; });
    CHECK_THROWS_AS(assemble_divergence_form(g, bad, 1.0, 0.0, BallUnion(3)),
                    ellipticity_violation);
}

TEST_CASE("domain monotonicity: removing dofs never lowers lambda_1") {
    auto gen = rng::stream(31, 0);
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    for (int trial = 0; trial < 3; ++trial) {
        BallUnion S(3);
        S.add(pt(0.3 + 0.4 * gen.next_uniform(), 0.3 + 0.4 * gen.next_uniform(),
                 0.3 + 0.4 * gen.next_uniform()),
              0.15);
        const auto g1 = classify_grid(G, S, 0.125);
        BallUnion S2 = S;
        S2.add(pt(0.2, 0.2, 0.2), 0.15);
        const auto g2 = classify_grid(G, S2, 0.125);
        const double l1 = dense_lambda1(assemble_laplacian(g1, 0.0, BallUnion(3)));
        const double l2 = dense_lambda1(assemble_laplacian(g2, 0.0, BallUnion(3)));
        CHECK(l2 >= l1 - 1e-12);
    }
}

TEST_CASE("beta monotonicity and the discrete ordering chain") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    BallUnion S(3);
    S.add(pt(0.5, 0.5, 0.5), 0.15);
    const BallUnion B = S.fattened(0.15);
    const double h = 0.125;

    const auto g_plain = classify_grid(G, BallUnion(3), h);
    const auto g_S = classify_grid(G, S, h);
    const auto g_B = classify_grid(G, B, h);

    const auto H_omega = assemble_laplacian(g_B, 0.0, BallUnion(3));
    const double lambda_omega = dense_lambda1(H_omega);

    double prev_lambda = -1.0;
    for (double beta : {1.0, 10.0, 100.0, 1000.0}) {
        const double lam = dense_lambda1(assemble_laplacian(g_plain, beta, B));
        const double mu = dense_lambda1(assemble_laplacian(g_S, beta, B));
        CHECK(lam >= prev_lambda - 1e-12);
        CHECK(lam <= mu + 1e-10);
        CHECK(mu <= lambda_omega + 1e-10);
        prev_lambda = lam;
    }
}

TEST_CASE("grid refinement: first-order convergence of lambda_1") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    BallUnion S(3);
    S.add(pt(0.5, 0.5, 0.5), 0.2);
    double l_h = 0.0, l_h2 = 0.0;
    {
        const auto g = classify_grid(G, S, 0.125);
        l_h = dense_lambda1(assemble_laplacian(g, 0.0, BallUnion(3)));
    }
    {
        const auto g = classify_grid(G, S, 0.0625);
        const auto H = assemble_laplacian(g, 0.0, BallUnion(3));
        const auto r = spectral::smallest_eigs(H, 1, 1e-10, 5);
        REQUIRE(r.converged);
        l_h2 = r.eigenvalues[0];
    }
    // values at h and h/2 stay within a first-order band of each other
    CHECK(std::abs(l_h - l_h2) < 0.35 * l_h2);
}
