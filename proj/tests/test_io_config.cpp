#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>

#include "ucp/config.hpp"
#include "ucp/errors.hpp"
#include "ucp/grid.hpp"
#include "ucp/io.hpp"
#include "ucp/operators.hpp"
#include "ucp/rng.hpp"
#include "ucp/spectral.hpp"

using namespace ucp;

namespace {

Point pt(double x, double y, double z) { return Point{x, y, z}; }

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        const auto tick = std::chrono::steady_clock::now().time_since_epoch().count();
        path = std::filesystem::temp_directory_path() /
               ("ucp_test_" + std::to_string(tick % 1000000) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("matrix market round trip is entry-exact") {
    const auto G = ConvexDomain::box(pt(0, 0, 0), pt(1, 1, 1));
    BallUnion S(3);
    S.add(pt(0.5, 0.5, 0.5), 0.21);
    const auto g = classify_grid(G, S, 0.125);
    BallUnion B = S.fattened(0.1);
    const auto H = assemble_laplacian(g, 3.7, B);

    TempDir tmp;
    const auto path = tmp.file("op.mtx");
    io::write_matrix_market(path, H);
    const auto back = io::read_matrix_market(path);
    REQUIRE(back.n == H.n);
    for (std::int64_t i = 0; i < H.n; ++i) {
        for (std::int64_t k = H.row_ptr[static_cast<std::size_t>(i)];
             k < H.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            const std::int64_t j = H.col[static_cast<std::size_t>(k)];
            CHECK(back.entry(i, j) == H.entry(i, j)); // bitwise through %.17g
        }
    }

    CHECK_THROWS_AS(io::read_matrix_market(tmp.file("missing.mtx")), io_error);
}

TEST_CASE("grid mask round trip") {
    const auto G = ConvexDomain::ball(pt(0, 0, 0), 1.0);
    BallUnion S(3);
    S.add(pt(0, 0, 0), 0.3);
    const auto g = classify_grid(G, S, 0.2);
    TempDir tmp;
    io::write_grid_mask(tmp.file("g.mask"), g);
    const auto back = io::read_grid_mask(tmp.file("g.mask"));
    CHECK(back.dim == g.dim);
    CHECK(back.h == g.h);
    CHECK(back.shape == g.shape);
    CHECK(back.origin == g.origin);
    CHECK(back.node_class == g.node_class);
    CHECK(back.n_dofs == g.n_dofs);
}

TEST_CASE("ball union CSV round trip") {
    BallUnion u(3);
    u.add(pt(0.1, -0.2, 0.3), 0.05);
    u.add(pt(1.0 / 3.0, 2.0 / 7.0, -1e-7), 0.125);
    TempDir tmp;
    io::write_ball_csv(tmp.file("balls.csv"), u);
    const auto back = io::read_ball_csv(tmp.file("balls.csv"), 3);
    REQUIRE(back.size() == 2);
    CHECK(back.centers == u.centers);
    CHECK(back.radii == u.radii);
}

TEST_CASE("spectral result round trip") {
    spectral::SpectralResult r;
    r.eigenvalues = {0.5, 1.25};
    r.residuals = {1e-12, 3e-11};
    r.iterations = 17;
    r.converged = true;
    r.eigenvectors = {{1.0, 0.0, 0.25}, {0.0, -1.0, 1e-9}};
    TempDir tmp;
    io::write_spectral_result(tmp.file("eig.bin"), r);
    const auto back = io::read_spectral_result(tmp.file("eig.bin"));
    CHECK(back.eigenvalues == r.eigenvalues);
    CHECK(back.residuals == r.residuals);
    CHECK(back.iterations == r.iterations);
    CHECK(back.converged == r.converged);
    CHECK(back.eigenvectors == r.eigenvectors);
}

TEST_CASE("ini parsing: sections, repeats, comments, diagnostics") {
    const std::string text = R"(# comment
[domain]
kind = ball        ; trailing comment
center = 0 0 0
radius = 1.5

[obstacles]
ball = 0 0 0 0.2
ball = 0.5 0 0 0.1
fatten = 0.05
)";
    const auto ini = IniFile::parse_string(text);
    REQUIRE(ini.find("domain") != nullptr);
    CHECK(ini.require("domain").get_string("kind") == "ball");
    CHECK(ini.require("domain").get_double("radius") == 1.5);
    CHECK(ini.require("obstacles").all("ball").size() == 2);

    CHECK_THROWS_AS(IniFile::parse_string("key = 1\n"), config_error);         // outside section
    CHECK_THROWS_AS(IniFile::parse_string("[a\nk = 1\n"), config_error);       // malformed header
    CHECK_THROWS_AS(IniFile::parse_string("[a]\nnovalue\n"), config_error);    // missing '='
    CHECK_THROWS_AS(ini.require("domain").get_double("kind"), config_error);   // not a number
    CHECK_THROWS_AS(ini.require("nope"), config_error);

    // unknown keys are rejected by schema validation
    const auto bad = IniFile::parse_string("[domain]\nkind = ball\ncenter = 0 0 0\nradius = 1\nwat = 1\n");
    CHECK_THROWS_AS(load_geometry(bad), config_error);
}

TEST_CASE("geometry loading: all kinds") {
    const auto box = load_geometry(IniFile::parse_string(
        "[domain]\nkind = box\nlo = 0 0 0\nhi = 1 2 3\n"));
    CHECK(box.domain.kind() == DomainKind::box);
    CHECK(box.domain.dim() == 3);

    const auto ball = load_geometry(IniFile::parse_string(
        "[domain]\nkind = ball\ncenter = 0 0 0\nradius = 2\n[obstacles]\nball = 0 0 0 0.5\nfatten = 0.25\n"));
    CHECK(ball.domain.kind() == DomainKind::ball);
    CHECK(ball.obstacles.size() == 1);
    CHECK(ball.fattened().radii[0] == doctest::Approx(0.75));

    const auto ws = load_geometry(IniFile::parse_string(
        "[domain]\nkind = whole_space\ndim = 3\nhalf_width = 8\n"));
    CHECK(ws.domain.is_whole_space());

    const auto hs = load_geometry(IniFile::parse_string(
        "[domain]\nkind = halfspaces\nplane = 1 0 0 1\nplane = -1 0 0 1\nplane = 0 1 0 1\nplane = 0 -1 0 1\nplane = 0 0 1 1\nplane = 0 0 -1 1\ninterior = 0 0 0\n"));
    CHECK(hs.domain.kind() == DomainKind::halfspaces);
    CHECK(hs.domain.contains(pt(0.9, 0, 0)));
    CHECK_FALSE(hs.domain.contains(pt(1.1, 0, 0)));

    CHECK_THROWS_AS(load_geometry(IniFile::parse_string("[domain]\nkind = torus\n")), config_error);
}

TEST_CASE("csv obstacles resolve relative to the config directory") {
    TempDir tmp;
    BallUnion u(3);
    u.add(pt(0, 0, 0), 0.5);
    io::write_ball_csv(tmp.file("s.csv"), u);
    io::write_text_file(tmp.file("geo.ini"),
                        "[domain]\nkind = box\nlo = -1 -1 -1\nhi = 1 1 1\n[obstacles]\ncsv = s.csv\n");
    const auto ini = IniFile::parse_file(tmp.file("geo.ini"));
    const auto gs = load_geometry(ini, tmp.path.string());
    REQUIRE(gs.obstacles.size() == 1);
    CHECK(gs.obstacles.radii[0] == 0.5);
}
