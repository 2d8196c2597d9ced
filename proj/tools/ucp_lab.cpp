// ucp-lab: command-line front end for the spectral lower-bound laboratory.
//
// Subcommands: bounds, geom, assemble, eig, heat, projector, mc, verify,
// campaign, export. Machine-readable JSON is the primary output; checks set
// the exit code (0 = all declared checks passed).

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ucp/campaign.hpp"
#include "ucp/config.hpp"
#include "ucp/errors.hpp"
#include "ucp/io.hpp"
#include "ucp/parallel.hpp"
#include "ucp/report.hpp"
#include "ucp/rng.hpp"
#include "ucp/verify.hpp"

namespace {

using nlohmann::json;

struct Common {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string format = "json";
};

void add_common(CLI::App* cmd, Common& c, bool need_config) {
    auto* o = cmd->add_option("--config", c.config, "config file (INI)");
    if (need_config) o->required();
    cmd->add_option("--out", c.out, "output file or directory");
    cmd->add_option("--seed", c.seed, "override every seed in the run");
    cmd->add_option("--threads", c.threads, "worker threads (default: all, or UCP_LAB_THREADS)");
    cmd->add_option("--format", c.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
}

void apply_threads(const Common& c) {
    if (c.threads > 0) ucp::ThreadPool::set_threads(c.threads);
}

void emit(const Common& c, const json& j, bool single_line = false) {
    std::string text;
    if (c.format == "csv") {
        std::string csv = "key,value\n";
        const json flat = j.flatten();
        for (const auto& [k, v] : flat.items())
            csv += k + "," + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
        text = csv;
    } else {
        text = single_line ? j.dump() + "\n" : j.dump(2) + "\n";
    }
    if (!c.out.empty())
        ucp::io::write_text_file(c.out, text);
    else
        std::fputs(text.c_str(), stdout);
}

// kv pairs from "--key value" extras
std::vector<std::pair<std::string, std::string>> parse_extras(const std::vector<std::string>& ex) {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < ex.size(); ++i) {
        if (ex[i].rfind("--", 0) != 0)
            throw ucp::config_error("expected --name value pairs, got '" + ex[i] + "'");
        if (i + 1 >= ex.size()) throw ucp::config_error("missing value for '" + ex[i] + "'");
        out.emplace_back(ex[i].substr(2), ex[i + 1]);
        ++i;
    }
    return out;
}

// synthetic experiment section: config-section defaults + flag overrides
ucp::IniFile::Section make_exp(const std::string& kind, const Common& c,
                               const std::vector<std::pair<std::string, std::string>>& kv) {
    ucp::IniFile::Section s;
    s.name = "experiment:cli";
    auto set = [&](const std::string& key, const std::string& value) {
        for (auto& e : s.entries)
            if (e.key == key && key != "start" && key != "ball" && key != "clip") {
                e.value = value;
                return;
            }
        s.entries.push_back({key, value, 0});
    };
    set("kind", kind);
    if (!c.config.empty()) {
        set("geometry", c.config);
        const ucp::IniFile ini = ucp::IniFile::parse_file(c.config);
        if (const auto* sec = ini.find(kind))
            for (const auto& e : sec->entries) s.entries.push_back(e);
    }
    for (const auto& [k, v] : kv) set(k, v);
    return s;
}

int run_exp_and_emit(const std::string& kind, const Common& c,
                     const std::vector<std::pair<std::string, std::string>>& kv) {
    apply_threads(c);
    const auto exp = make_exp(kind, c, kv);
    const auto res = ucp::run_experiment(exp, ".", c.out.empty() ? "." : c.out, c.seed);
    if (res.failed) {
        std::cerr << "error: " << res.report.value("error", std::string("unknown")) << "\n";
        return 2;
    }
    Common cc = c;
    if (!c.out.empty() && (kind == "export")) cc.out.clear(); // export writes its own files
    emit(cc, res.report);
    return res.checks_declared && !res.checks_ok ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ucp-lab: numerical laboratory for spectral lower bounds on perforated domains"};
    app.require_subcommand(1);

    // ---- bounds ----
    Common cb;
    auto* bounds_cmd = app.add_subcommand("bounds", "evaluate a closed-form bound");
    std::string bounds_op;
    std::string batch_in;
    bounds_cmd->add_option("op", bounds_op, "bound name (see README)")->required();
    bounds_cmd->add_option("--batch", batch_in, "CSV of parameter rows");
    add_common(bounds_cmd, cb, false);
    bounds_cmd->allow_extras();

    // ---- geom ----
    Common cg;
    auto* geom_cmd = app.add_subcommand("geom", "geometry constructions and certificates");
    std::string geom_action;
    geom_cmd->add_option("action", geom_action,
                         "dense|skeleton|voronoi|inradius|ballpool|appendix|export-csv")
        ->required();
    add_common(geom_cmd, cg, false);
    geom_cmd->allow_extras();

    // ---- assemble / export ----
    Common ca;
    auto* asm_cmd = app.add_subcommand("assemble", "classify a grid and assemble the operator");
    add_common(asm_cmd, ca, true);
    asm_cmd->allow_extras();

    Common ce;
    auto* export_cmd = app.add_subcommand("export", "write the operator (Matrix Market) and grid mask");
    add_common(export_cmd, ce, true);
    export_cmd->allow_extras();

    // ---- eig ----
    Common cei;
    auto* eig_cmd = app.add_subcommand("eig", "smallest eigenpairs of the assembled operator");
    std::string eig_vectors_out;
    eig_cmd->add_option("--vectors-out", eig_vectors_out, "write full eigenpairs (JSON+binary)");
    add_common(eig_cmd, cei, true);
    eig_cmd->allow_extras();

    // ---- heat ----
    Common ch;
    auto* heat_cmd = app.add_subcommand("heat", "apply the heat semigroup to a vector");
    add_common(heat_cmd, ch, true);
    heat_cmd->allow_extras();

    // ---- projector ----
    Common cp;
    auto* proj_cmd = app.add_subcommand("projector", "apply a spectral projector to a vector");
    add_common(proj_cmd, cp, true);
    proj_cmd->allow_extras();

    // ---- mc ----
    Common cm;
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo estimators (hitrun|fk|gap)");
    std::string mc_which;
    mc_cmd->add_option("which", mc_which, "hitrun|fk|gap")
        ->required()
        ->check(CLI::IsMember({"hitrun", "fk", "gap"}));
    add_common(mc_cmd, cm, true);
    mc_cmd->allow_extras();

    // ---- verify ----
    Common cv;
    auto* verify_cmd = app.add_subcommand("verify", "end-to-end uncertainty-principle verification");
    add_common(verify_cmd, cv, true);
    verify_cmd->allow_extras();

    // ---- campaign ----
    Common cc;
    auto* camp_cmd = app.add_subcommand("campaign", "run a campaign config");
    add_common(camp_cmd, cc, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (bounds_cmd->parsed()) {
            apply_threads(cb);
            if (!batch_in.empty()) {
                // batch: CSV header names the arguments; one value column appended
                const std::string text = ucp::io::read_text_file(batch_in);
                std::istringstream in(text);
                std::string header;
                if (!std::getline(in, header)) throw ucp::config_error("empty batch file");
                std::vector<std::string> cols;
                std::istringstream hs(header);
                std::string col;
                while (std::getline(hs, col, ',')) cols.push_back(col);
                std::ostringstream outcsv;
                outcsv << header << ",value\n";
                std::string line;
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    std::istringstream ls(line);
                    std::map<std::string, double> args;
                    std::string cell;
                    for (const auto& name : cols) {
                        if (!std::getline(ls, cell, ','))
                            throw ucp::config_error("batch row has fewer columns than header");
                        args[name] = std::stod(cell);
                    }
                    const auto rep = ucp::bounds::evaluate_bound(bounds_op, args);
                    char buf[64];
                    std::snprintf(buf, sizeof buf, "%.17g", rep.value);
                    outcsv << line << ',' << buf << '\n';
                }
                if (!cb.out.empty())
                    ucp::io::write_text_file(cb.out, outcsv.str());
                else
                    std::fputs(outcsv.str().c_str(), stdout);
                return 0;
            }
            std::map<std::string, double> args;
            for (const auto& [k, v] : parse_extras(bounds_cmd->remaining()))
                args[k] = std::stod(v);
            const auto rep = ucp::bounds::evaluate_bound(bounds_op, args);
            emit(cb, ucp::report::to_json(rep), /*single_line=*/true);
            return 0;
        }

        if (geom_cmd->parsed()) {
            apply_threads(cg);
            const auto kv = parse_extras(geom_cmd->remaining());
            auto get = [&](const std::string& key, const char* fallback = nullptr) -> std::string {
                for (const auto& [k, v] : kv)
                    if (k == key) return v;
                if (fallback) return fallback;
                throw ucp::config_error("geom " + geom_action + ": missing --" + key);
            };
            if (geom_action == "dense") {
                return run_exp_and_emit("denseness", cg, kv);
            }
            if (geom_action == "skeleton") {
                return run_exp_and_emit("skeleton", cg, kv);
            }
            if (geom_action == "inradius") {
                return run_exp_and_emit("inradius", cg, kv);
            }
            if (geom_action == "voronoi") {
                const ucp::IniFile ini = ucp::IniFile::parse_file(cg.config);
                const auto gs = ucp::load_geometry(ini);
                const auto sk = ucp::build_skeleton(gs.obstacles.centers, std::stod(get("R")));
                std::istringstream ps(get("point"));
                ucp::Point x;
                double v;
                while (ps >> v) x.push_back(v);
                const auto idx = ucp::voronoi_assign(sk, x);
                emit(cg, json{{"index", idx}, {"point", x}, {"assigned_to", sk.points[idx]}});
                return 0;
            }
            if (geom_action == "ballpool") {
                const double ell = std::stod(get("ell"));
                const double rho = std::stod(get("rho"));
                const long n = std::stol(get("cells", "3"));
                const int d = static_cast<int>(std::stol(get("dim", "3")));
                std::vector<std::vector<long>> gamma;
                std::vector<ucp::Point> offsets;
                std::vector<long> idx(static_cast<std::size_t>(d), 0);
                for (;;) {
                    gamma.push_back(idx);
                    offsets.emplace_back(static_cast<std::size_t>(d), 0.5 * ell);
                    int a = d - 1;
                    while (a >= 0 && ++idx[static_cast<std::size_t>(a)] >= n) {
                        idx[static_cast<std::size_t>(a)] = 0;
                        --a;
                    }
                    if (a < 0) break;
                }
                const auto pool = ucp::make_ball_pool(gamma, ell, rho, offsets);
                if (!cg.out.empty()) ucp::io::write_ball_csv(cg.out, pool.obstacles);
                json j{{"balls", pool.obstacles.size()},
                       {"covering_radius", pool.covering_radius},
                       {"thickness", pool.thickness},
                       {"cells", gamma.size()}};
                if (!cg.out.empty()) j["csv"] = cg.out;
                Common c2 = cg;
                c2.out.clear();
                emit(c2, j);
                return 0;
            }
            if (geom_action == "appendix") {
                const long w = std::stol(get("half-width", "2"));
                const double r0 = std::stod(get("r0", "0.25"));
                const bool dyadic = get("dyadic", "false") == "true";
                const auto radii = dyadic ? ucp::dyadic_shell_radii(r0, w)
                                          : std::vector<double>{r0};
                const auto [G, S] = ucp::make_appendix_example(radii, w,
                                                               static_cast<int>(std::stol(get("dim", "3"))));
                if (!cg.out.empty()) ucp::io::write_ball_csv(cg.out, S);
                json j{{"balls", S.size()}, {"half_width", w}, {"dyadic", dyadic}};
                if (!cg.out.empty()) j["csv"] = cg.out;
                Common c2 = cg;
                c2.out.clear();
                emit(c2, j);
                return 0;
            }
            if (geom_action == "export-csv") {
                const ucp::IniFile ini = ucp::IniFile::parse_file(cg.config);
                const auto gs = ucp::load_geometry(ini);
                if (cg.out.empty()) throw ucp::config_error("geom export-csv requires --out");
                ucp::io::write_ball_csv(cg.out, gs.obstacles);
                emit(Common{}, json{{"balls", gs.obstacles.size()}, {"csv", cg.out}});
                return 0;
            }
            throw ucp::config_error("unknown geom action '" + geom_action + "'");
        }

        if (asm_cmd->parsed()) {
            apply_threads(ca);
            const auto kv = parse_extras(asm_cmd->remaining());
            const ucp::IniFile ini = ucp::IniFile::parse_file(ca.config);
            const auto gs = ucp::load_geometry(ini);
            double h = 0.0, beta = 0.0;
            for (const auto& [k, v] : kv) {
                if (k == "h") h = std::stod(v);
                else if (k == "beta") beta = std::stod(v);
                else throw ucp::config_error("assemble: unknown flag --" + k);
            }
            if (!(h > 0.0)) throw ucp::config_error("assemble: --h required");
            const auto grid = ucp::classify_grid(gs.domain, gs.obstacles, h);
            const auto H = ucp::assemble_laplacian(
                grid, beta, beta != 0.0 ? gs.fattened() : ucp::BallUnion(gs.domain.dim()));
            std::int64_t interior = 0, boundary = 0, removed = 0;
            for (auto c : grid.node_class) {
                interior += c == ucp::NodeClass::interior;
                boundary += c == ucp::NodeClass::neumann_boundary;
                removed += c == ucp::NodeClass::dirichlet_removed;
            }
            emit(ca, json{{"n", H.n},
                          {"nnz", H.nnz()},
                          {"h", h},
                          {"interior", interior},
                          {"neumann_boundary", boundary},
                          {"dirichlet_removed", removed},
                          {"max_asymmetry", H.max_asymmetry()}});
            return 0;
        }

        if (export_cmd->parsed()) return run_exp_and_emit("export", ce, parse_extras(export_cmd->remaining()));
        if (eig_cmd->parsed()) {
            if (!eig_vectors_out.empty()) {
                apply_threads(cei);
                const auto kv = parse_extras(eig_cmd->remaining());
                const ucp::IniFile ini = ucp::IniFile::parse_file(cei.config);
                const auto gs = ucp::load_geometry(ini);
                double h = 0.0, tol = 1e-8;
                int k = 1;
                for (const auto& [key, v] : kv) {
                    if (key == "h") h = std::stod(v);
                    else if (key == "tol") tol = std::stod(v);
                    else if (key == "k") k = std::stoi(v);
                }
                const auto grid = ucp::classify_grid(gs.domain, gs.obstacles, h);
                const auto H = ucp::assemble_laplacian(grid, 0.0, ucp::BallUnion(gs.domain.dim()));
                const auto r = ucp::spectral::smallest_eigs(H, k, tol, cei.seed ? cei.seed : 1);
                ucp::io::write_spectral_result(eig_vectors_out, r);
                emit(cei, ucp::report::to_json(r));
                return r.converged ? 0 : 1;
            }
            return run_exp_and_emit("eig", cei, parse_extras(eig_cmd->remaining()));
        }

        if (heat_cmd->parsed() || proj_cmd->parsed()) {
            const bool is_heat = heat_cmd->parsed();
            const Common& c = is_heat ? ch : cp;
            apply_threads(c);
            const auto kv = parse_extras((is_heat ? heat_cmd : proj_cmd)->remaining());
            const ucp::IniFile ini = ucp::IniFile::parse_file(c.config);
            const auto gs = ucp::load_geometry(ini);
            double h = 0.0, t = 1.0, tol = 1e-8, beta = 0.0, emax = 0.0;
            std::string f = "ones", via = "eigenpairs";
            int degree = 400;
            for (const auto& [k, v] : kv) {
                if (k == "h") h = std::stod(v);
                else if (k == "t") t = std::stod(v);
                else if (k == "tol") tol = std::stod(v);
                else if (k == "beta") beta = std::stod(v);
                else if (k == "emax") emax = std::stod(v);
                else if (k == "f") f = v;
                else if (k == "via") via = v;
                else if (k == "degree") degree = std::stoi(v);
                else throw ucp::config_error("unknown flag --" + k);
            }
            if (!(h > 0.0)) throw ucp::config_error("--h required");
            const auto grid = ucp::classify_grid(gs.domain, gs.obstacles, h);
            const auto H = ucp::assemble_laplacian(
                grid, beta, beta != 0.0 ? gs.fattened() : ucp::BallUnion(gs.domain.dim()));
            std::vector<double> vec(static_cast<std::size_t>(H.n), 1.0);
            if (f == "random") {
                auto gen = ucp::rng::stream(c.seed ? c.seed : 1, 77);
                for (auto& x : vec) x = gen.next_normal();
            } else if (f != "ones") {
                throw ucp::config_error("--f must be ones|random");
            }
            std::vector<double> out(static_cast<std::size_t>(H.n));
            json j;
            if (is_heat) {
                ucp::spectral::HeatActionParams hp;
                hp.t = t;
                hp.tolerance = tol;
                hp.seed = c.seed ? c.seed : 1;
                ucp::spectral::apply_heat(H, hp, vec, out);
                j = json{{"t", t},
                         {"degree", hp.degree_used},
                         {"achieved_error", hp.achieved_error},
                         {"spectral_bound", hp.spectral_bound},
                         {"input_norm", ucp::det_norm2(vec)},
                         {"output_norm", ucp::det_norm2(out)}};
            } else {
                ucp::spectral::ProjectorOptions po;
                po.tol = tol;
                po.seed = c.seed ? c.seed : 1;
                po.filter_degree = degree;
                const auto pr = ucp::spectral::spectral_projector_apply(
                    H, emax, vec,
                    via == "filter" ? ucp::spectral::ProjectorVia::polynomial_filter
                                    : ucp::spectral::ProjectorVia::eigenpairs,
                    po);
                out = pr.out;
                j = json{{"emax", emax},
                         {"via", via},
                         {"pairs_used", pr.pairs_used},
                         {"degree", pr.degree},
                         {"input_norm", ucp::det_norm2(vec)},
                         {"output_norm", ucp::det_norm2(out)}};
            }
            if (!c.out.empty()) {
                std::string blob(reinterpret_cast<const char*>(out.data()),
                                 out.size() * sizeof(double));
                ucp::io::write_text_file(c.out, blob);
                j["vector_file"] = c.out;
            }
            Common c2 = c;
            c2.out.clear();
            emit(c2, j);
            return 0;
        }

        if (mc_cmd->parsed()) {
            const std::string kind = mc_which == "hitrun" ? "mc_hitrun"
                                     : mc_which == "fk"   ? "mc_fk"
                                                          : "mc_gap";
            return run_exp_and_emit(kind, cm, parse_extras(mc_cmd->remaining()));
        }

        if (verify_cmd->parsed()) {
            apply_threads(cv);
            const auto exp = make_exp("verify", cv, parse_extras(verify_cmd->remaining()));
            const auto res = ucp::run_experiment(exp, ".", ".", cv.seed);
            if (res.failed) {
                std::cerr << "error: " << res.report.value("error", std::string("unknown")) << "\n";
                return 2;
            }
            if (!cv.out.empty()) {
                ucp::io::write_text_file(cv.out, res.report.dump(2) + "\n");
                // flat CSV of the per-eigenvector rows next to the JSON
                std::string csv = "lambda,mass_ratio,pass\n";
                for (const auto& row : res.report.at("rows")) {
                    char buf[96];
                    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n",
                                  row.at("lambda").get<double>(),
                                  row.at("mass_ratio").get<double>(),
                                  row.at("pass").get<bool>() ? 1 : 0);
                    csv += buf;
                }
                ucp::io::write_text_file(cv.out + ".rows.csv", csv);
            } else {
                emit(cv, res.report);
            }
            const bool all = res.report.at("pass").at("all").get<bool>();
            return all ? 0 : 1;
        }

        if (camp_cmd->parsed()) {
            apply_threads(cc);
            const auto res = ucp::run_campaign(cc.config, cc.out.empty() ? "reports" : cc.out,
                                               cc.seed);
            for (const auto& e : res.experiments)
                std::fprintf(stdout, "%-28s %-12s %s\n", e.name.c_str(), e.kind.c_str(),
                             e.failed ? "ERROR" : (e.checks_ok ? "ok" : "CHECK FAILED"));
            return res.exit_code;
        }
    } catch (const ucp::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
