#include "ucp/campaign.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "ucp/errors.hpp"
#include "ucp/io.hpp"
#include "ucp/report.hpp"
#include "ucp/verify.hpp"

namespace ucp {

namespace {

using nlohmann::json;

std::string dirname_of(const std::string& path) {
    const auto p = std::filesystem::path(path).parent_path();
    return p.empty() ? std::string(".") : p.string();
}

GeometrySpec geometry_for(const IniFile::Section& exp, const std::string& base_dir) {
    const std::string rel = exp.get_string("geometry");
    std::string path = rel;
    if (!rel.empty() && rel.front() != '/') path = base_dir + "/" + rel;
    const IniFile g = IniFile::parse_file(path);
    return load_geometry(g, dirname_of(path));
}

stochastic::PathConfig path_config(const IniFile::Section& exp, std::uint64_t seed) {
    stochastic::PathConfig cfg;
    cfg.dt = exp.get_double("dt");
    cfg.horizon = exp.get_double("horizon", 1.0);
    cfg.n_paths = exp.get_int("paths");
    cfg.seed = seed;
    cfg.start = exp.get_doubles("start");
    return cfg;
}

stochastic::FieldSampler field_sampler(const std::string& name) {
    if (name == "one") return [](std::span<const double>) { return 1.0; };
    if (name == "gauss")
        return [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return std::exp(-s);
        };
    if (name == "coord0") return [](std::span<const double> x) { return x[0]; };
    throw config_error("unknown field sampler '" + name + "' (one|gauss|coord0)");
}

// flat boolean flags extracted per kind for check_pass
using Flags = std::map<std::string, bool>;

struct Executed {
    json report;
    double value = 0.0;
    Flags flags;
};

Executed exec_bounds(const IniFile::Section& exp) {
    std::map<std::string, double> args;
    static const std::set<std::string> keys = {"kind",  "op",        "check_min", "check_max",
                                               "check_pass", "seed", "out"};
    for (const auto& e : exp.entries) {
        if (keys.count(e.key)) continue;
        std::istringstream ss(e.value);
        double v;
        if (!(ss >> v)) throw config_error("line " + std::to_string(e.line) + ": expected number");
        args[e.key] = v;
    }
    const auto rep = bounds::evaluate_bound(exp.get_string("op"), args);
    Executed ex;
    ex.report = report::to_json(rep);
    ex.value = rep.value;
    return ex;
}

Executed exec_denseness(const IniFile::Section& exp, const std::string& base_dir) {
    exp.validate_keys({"kind", "geometry", "R", "delta", "spacing", "check_min", "check_max",
                       "check_pass", "seed", "out"});
    const auto gs = geometry_for(exp, base_dir);
    const double delta = exp.get_double("delta");
    const auto cert = check_relative_denseness(gs.fattened(), gs.domain, exp.get_double("R"), delta,
                                               exp.get_double("spacing", 0.5 * delta));
    Executed ex;
    ex.report = report::to_json(cert);
    ex.value = cert.margin;
    ex.flags["verified"] = cert.verified;
    return ex;
}

Executed exec_inradius(const IniFile::Section& exp, const std::string& base_dir) {
    exp.validate_keys({"kind", "geometry", "check_min", "check_max", "check_pass", "seed", "out"});
    const auto gs = geometry_for(exp, base_dir);
    const auto r = inradius_estimate(gs.domain);
    Executed ex;
    ex.report = json{{"radius", r.radius}, {"center", r.center}};
    ex.value = r.radius;
    return ex;
}

Executed exec_skeleton(const IniFile::Section& exp, const std::string& base_dir) {
    exp.validate_keys({"kind", "geometry", "R", "check_min", "check_max", "check_pass", "seed",
                       "out"});
    const auto gs = geometry_for(exp, base_dir);
    const auto sk = build_skeleton(gs.obstacles.centers, exp.get_double("R"));
    Executed ex;
    ex.report = report::to_json(sk);
    ex.value = static_cast<double>(sk.points.size());
    return ex;
}

Executed exec_eig(const IniFile::Section& exp, const std::string& base_dir, std::uint64_t seed) {
    exp.validate_keys({"kind", "geometry", "h", "k", "tol", "refine", "gradform", "beta",
                       "check_min", "check_max", "check_pass", "seed", "out"});
    const auto gs = geometry_for(exp, base_dir);
    const double h = exp.get_double("h");
    const int k = static_cast<int>(exp.get_int("k", 1));
    const double tol = exp.get_double("tol", 1e-8);
    const double beta = exp.get_double("beta", 0.0);
    const bool gradform = exp.get_bool("gradform", false);
    const int refine = static_cast<int>(exp.get_int("refine", 0));

    auto lambda_at = [&](double hh) {
        const auto grid = classify_grid(gs.domain, gs.obstacles, hh);
        const auto H = assemble_laplacian(grid, beta, beta != 0.0 ? gs.fattened() : BallUnion(gs.domain.dim()));
        const auto r = spectral::smallest_eigs(H, k, tol, seed);
        if (!r.converged) throw std::runtime_error("eig experiment: solver did not converge");
        return r;
    };

    const auto fine = lambda_at(h);
    double lam = fine.eigenvalues.front();
    json j;
    j["eigenvalues"] = fine.eigenvalues;
    j["residuals"] = fine.residuals;
    if (refine >= 1) {
        const auto coarse = lambda_at(2.0 * h);
        lam = 2.0 * lam - coarse.eigenvalues.front();
        j["eigenvalue_coarse"] = coarse.eigenvalues.front();
        j["eigenvalue_extrapolated"] = lam;
    }
    if (gradform) {
        lam *= 2.0;
        j["gradform"] = true;
    }
    j["value"] = lam;
    Executed ex;
    ex.report = std::move(j);
    ex.value = lam;
    return ex;
}

Executed exec_lambda_curve(const IniFile::Section& exp, const std::string& base_dir,
                           std::uint64_t seed) {
    exp.validate_keys({"kind", "geometry", "h", "betas", "emax", "tol", "check_min", "check_max",
                       "check_pass", "seed", "out"});
    const auto gs = geometry_for(exp, base_dir);
    const auto grid = classify_grid(gs.domain, BallUnion(gs.domain.dim()), exp.get_double("h"));
    const auto H0 = assemble_laplacian(grid, 0.0, BallUnion(gs.domain.dim()));
    const auto mask = grid.dof_mask(gs.fattened());
    const auto curve =
        lambda_beta_curve(H0, mask, exp.get_doubles("betas"), exp.get_double("tol", 1e-8), seed);
    Executed ex;
    ex.report = report::to_json(curve);
    ex.flags["nondecreasing"] = curve.nondecreasing;
    ex.flags["concave"] = curve.concave;
    if (exp.has("emax")) {
        const double emax = exp.get_double("emax");
        double kappa = 0.0;
        bool any = false;
        for (const auto& [b, l] : curve.points)
            if (l > emax) {
                kappa = std::max(kappa, (l - emax) / b);
                any = true;
            }
        ex.report["kappa_bls"] = kappa;
        ex.report["any_valid_beta"] = any;
        ex.value = kappa;
        ex.flags["any_valid_beta"] = any;
    } else {
        ex.value = curve.points.back().second;
    }
    return ex;
}

Executed exec_mc_hitrun(const IniFile::Section& exp, const std::string& base_dir,
                        std::uint64_t seed) {
    exp.validate_keys({"kind", "geometry", "rho", "alpha", "dt", "horizon", "paths", "start",
                       "check_min", "check_max", "check_pass", "seed", "out"});
    const auto gs = geometry_for(exp, base_dir);
    const double rho = exp.get_double("rho");
    if (std::abs(gs.fatten - rho) > 1e-12)
        throw config_error("mc_hitrun: [obstacles] fatten must equal rho");
    const auto r = stochastic::estimate_hit_and_run(gs.domain, gs.obstacles, gs.fattened(), rho,
                                                    exp.get_double("alpha"),
                                                    path_config(exp, seed));
    Executed ex;
    ex.report = report::to_json(r);
    ex.value = r.estimate.value;
    ex.flags["within_paper_bound"] = ex.report.at("within_paper_bound").get<bool>();
    return ex;
}

Executed exec_mc_fk(const IniFile::Section& exp, const std::string& base_dir, std::uint64_t seed) {
    exp.validate_keys({"kind", "geometry", "beta", "killed", "f", "dt", "horizon", "paths",
                       "start", "check_min", "check_max", "check_pass", "seed", "out"});
    const auto gs = geometry_for(exp, base_dir);
    const auto est = stochastic::feynman_kac(
        gs.domain, gs.obstacles, gs.fattened(), exp.get_double("beta", 0.0),
        field_sampler(exp.get_string("f", "one")), path_config(exp, seed),
        exp.get_bool("killed", false));
    Executed ex;
    ex.report = report::to_json(est);
    ex.value = est.value;
    return ex;
}

Executed exec_mc_gap(const IniFile::Section& exp, const std::string& base_dir, std::uint64_t seed) {
    exp.validate_keys({"kind", "geometry", "rho", "beta", "dt", "horizon", "paths", "start",
                       "check_min", "check_max", "check_pass", "seed", "out"});
    const auto gs = geometry_for(exp, base_dir);
    const double rho = exp.get_double("rho");
    if (std::abs(gs.fatten - rho) > 1e-12)
        throw config_error("mc_gap: [obstacles] fatten must equal rho");
    std::vector<Point> starts;
    for (const auto* e : exp.all("start")) {
        std::istringstream ss(e->value);
        Point p;
        double v;
        while (ss >> v) p.push_back(v);
        starts.push_back(std::move(p));
    }
    stochastic::PathConfig cfg;
    cfg.dt = exp.get_double("dt");
    cfg.horizon = exp.get_double("horizon", 1.0);
    cfg.n_paths = exp.get_int("paths");
    cfg.seed = seed;
    cfg.start = starts.front();
    const auto r = stochastic::estimate_semigroup_gap(gs.domain, gs.obstacles, gs.fattened(), rho,
                                                      exp.get_double("beta"), starts, cfg);
    Executed ex;
    ex.report = report::to_json(r);
    ex.value = r.max_estimate.value;
    ex.flags["within_proof_bound"] = ex.report.at("within_proof_bound").get<bool>();
    return ex;
}

Executed exec_verify(const IniFile::Section& exp, const std::string& base_dir,
                     std::uint64_t seed) {
    exp.validate_keys({"kind", "geometry", "R", "delta", "eta0", "t", "h", "refine", "betas",
                       "tol", "max_pairs", "coefficient", "check_min", "check_max", "check_pass",
                       "seed", "out"});
    const auto gs = geometry_for(exp, base_dir);
    VerifyOptions opt;
    opt.R = exp.get_double("R");
    opt.delta = exp.get_double("delta");
    opt.eta0 = exp.get_double("eta0", 1.0);
    opt.t = exp.get_double("t", 0.5);
    opt.h = exp.get_double("h");
    opt.refine = static_cast<int>(exp.get_int("refine", 1));
    if (exp.has("betas")) opt.betas = exp.get_doubles("betas");
    opt.seed = seed;
    opt.tol = exp.get_double("tol", 1e-8);
    opt.max_pairs = static_cast<int>(exp.get_int("max_pairs", 64));
    const std::string coeff = exp.get_string("coefficient", "none");
    if (coeff == "checkerboard") {
        const int d = gs.domain.dim();
        opt.a_field = scalar_coefficients(d, [](std::span<const double> x) {
            long s = 0;
            for (double c : x) s += static_cast<long>(std::floor(c));
            return (s % 2 == 0) ? 1.0 : 4.0;
        });
    } else if (coeff != "none") {
        throw config_error("verify: unknown coefficient field '" + coeff + "'");
    }
    const auto rep = verify_main(gs.domain, gs.fattened(), opt);
    Executed ex;
    ex.report = report::to_json(rep);
    ex.value = rep.kappa_final;
    ex.flags["all"] = rep.all_pass();
    ex.flags["headline"] = rep.pass_headline;
    ex.flags["constant_margin"] = rep.pass_constant_margin;
    ex.flags["mu0"] = rep.pass_mu0;
    ex.flags["chain"] = rep.pass_chain;
    return ex;
}

Executed exec_export(const IniFile::Section& exp, const std::string& base_dir,
                     const std::string& out_dir) {
    exp.validate_keys({"kind", "geometry", "h", "beta", "matrix_out", "mask_out", "check_min",
                       "check_max", "check_pass", "seed", "out"});
    const auto gs = geometry_for(exp, base_dir);
    const auto grid = classify_grid(gs.domain, gs.obstacles, exp.get_double("h"));
    const double beta = exp.get_double("beta", 0.0);
    const auto H = assemble_laplacian(grid, beta,
                                      beta != 0.0 ? gs.fattened() : BallUnion(gs.domain.dim()));
    const std::string mtx = out_dir + "/" + exp.get_string("matrix_out", "operator.mtx");
    const std::string msk = out_dir + "/" + exp.get_string("mask_out", "grid.mask");
    io::write_matrix_market(mtx, H);
    io::write_grid_mask(msk, grid);
    const auto back = io::read_matrix_market(mtx);
    bool round_trip = back.n == H.n;
    if (round_trip) {
        for (std::int64_t i = 0; i < H.n && round_trip; ++i)
            for (std::int64_t k = H.row_ptr[static_cast<std::size_t>(i)];
                 k < H.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
                const std::int64_t j = H.col[static_cast<std::size_t>(k)];
                if (back.entry(i, j) != H.entry(i, j)) {
                    round_trip = false;
                    break;
                }
            }
    }
    Executed ex;
    ex.report = json{{"n", H.n}, {"nnz", H.nnz()}, {"matrix_file", mtx}, {"mask_file", msk},
                     {"round_trip", round_trip}};
    ex.value = static_cast<double>(H.nnz());
    ex.flags["round_trip"] = round_trip;
    return ex;
}

} // namespace

ExperimentResult run_experiment(const IniFile::Section& exp, const std::string& base_dir,
                                const std::string& out_dir, std::uint64_t seed_override) {
    ExperimentResult res;
    res.name = exp.name;
    const auto colon = exp.name.find(':');
    res.name = colon == std::string::npos ? exp.name : exp.name.substr(colon + 1);
    res.kind = exp.get_string("kind");
    const std::uint64_t seed =
        seed_override ? seed_override : static_cast<std::uint64_t>(exp.get_int("seed", 1));
    try {
        Executed ex;
        if (res.kind == "bounds")
            ex = exec_bounds(exp);
        else if (res.kind == "denseness")
            ex = exec_denseness(exp, base_dir);
        else if (res.kind == "inradius")
            ex = exec_inradius(exp, base_dir);
        else if (res.kind == "skeleton")
            ex = exec_skeleton(exp, base_dir);
        else if (res.kind == "eig")
            ex = exec_eig(exp, base_dir, seed);
        else if (res.kind == "lambda_curve")
            ex = exec_lambda_curve(exp, base_dir, seed);
        else if (res.kind == "mc_hitrun")
            ex = exec_mc_hitrun(exp, base_dir, seed);
        else if (res.kind == "mc_fk")
            ex = exec_mc_fk(exp, base_dir, seed);
        else if (res.kind == "mc_gap")
            ex = exec_mc_gap(exp, base_dir, seed);
        else if (res.kind == "verify")
            ex = exec_verify(exp, base_dir, seed);
        else if (res.kind == "export")
            ex = exec_export(exp, base_dir, out_dir);
        else
            throw config_error("unknown experiment kind '" + res.kind + "'");

        res.report = std::move(ex.report);
        res.value = ex.value;
        if (exp.has("check_min")) {
            res.checks_declared = true;
            if (!(res.value >= exp.get_double("check_min"))) res.checks_ok = false;
        }
        if (exp.has("check_max")) {
            res.checks_declared = true;
            if (!(res.value <= exp.get_double("check_max"))) res.checks_ok = false;
        }
        if (exp.has("check_pass")) {
            res.checks_declared = true;
            const std::string flag = exp.get_string("check_pass");
            const auto it = ex.flags.find(flag);
            if (it == ex.flags.end())
                throw config_error("experiment '" + res.name + "': no flag named '" + flag + "'");
            if (!it->second) res.checks_ok = false;
        }
        res.report["checks_ok"] = res.checks_ok;
    } catch (const std::exception& e) {
        res.failed = true;
        res.checks_ok = false;
        res.report = json{{"error", e.what()}};
    }
    return res;
}

CampaignResult run_campaign(const std::string& config_path, const std::string& out_dir,
                            std::uint64_t seed_override) {
    const auto t_start = std::chrono::steady_clock::now();
    const IniFile ini = IniFile::parse_file(config_path);
    const std::string base_dir = dirname_of(config_path);
    std::filesystem::create_directories(out_dir);

    CampaignResult out;
    out.out_dir = out_dir;

    // schema check before any computation
    for (const auto& s : ini.sections) {
        if (s.name == "campaign") {
            s.validate_keys({"name"});
            continue;
        }
        if (s.name.rfind("experiment:", 0) != 0)
            throw config_error("line " + std::to_string(s.line) + ": unexpected section [" +
                               s.name + "]");
        if (!s.has("kind"))
            throw config_error("line " + std::to_string(s.line) + ": experiment without kind");
    }

    std::ostringstream summary;
    summary << "name,kind,value,failed,checks_ok\n";
    bool all_ok = true;
    for (const auto& s : ini.sections) {
        if (s.name.rfind("experiment:", 0) != 0) continue;
        ExperimentResult r = run_experiment(s, base_dir, out_dir, seed_override);
        const std::string file = out_dir + "/" + r.name + ".json";
        io::write_text_file(file, r.report.dump(2) + "\n");
        summary << r.name << ',' << r.kind << ',';
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", r.value);
            summary << buf;
        }
        summary << ',' << (r.failed ? 1 : 0) << ',' << (r.checks_ok ? 1 : 0) << '\n';
        if (r.failed || (r.checks_declared && !r.checks_ok)) all_ok = false;
        out.experiments.push_back(std::move(r));
    }
    io::write_text_file(out_dir + "/summary.csv", summary.str());

    const auto t_end = std::chrono::steady_clock::now();
    json meta;
    meta["elapsed_seconds"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t_end - t_start).count() / 1000.0;
    meta["config"] = config_path;
    io::write_text_file(out_dir + "/campaign_meta.json", meta.dump(2) + "\n");

    out.exit_code = all_ok ? 0 : 1;
    return out;
}

} // namespace ucp
