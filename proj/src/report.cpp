#include "ucp/report.hpp"

#include <sstream>

namespace ucp::report {

using nlohmann::json;

json to_json(const bounds::BoundReport& r) {
    json j;
    j["name"] = r.name;
    j["inputs"] = r.inputs;
    j["value"] = r.value;
    j["units"] = r.units;
    if (!r.extra.empty()) j["extra"] = r.extra;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

json to_json(const stochastic::MCEstimate& e) {
    return json{{"value", e.value}, {"ci_halfwidth", e.ci_halfwidth}, {"n", e.n}, {"seed", e.seed}};
}

json to_json(const stochastic::HitAndRunResult& r) {
    json j;
    j["estimate"] = to_json(r.estimate);
    j["paper_bound"] = r.paper_bound;
    j["within_paper_bound"] = r.estimate.value - 2.0 * r.estimate.ci_halfwidth <= r.paper_bound;
    return j;
}

json to_json(const stochastic::SemigroupGapResult& r) {
    json j;
    j["max_estimate"] = to_json(r.max_estimate);
    j["argmax"] = r.argmax;
    j["alpha_star"] = r.alpha_star;
    j["proof_bound"] = r.proof_bound;
    j["within_proof_bound"] =
        r.max_estimate.value - 2.0 * r.max_estimate.ci_halfwidth <= r.proof_bound;
    json per = json::array();
    for (const auto& e : r.per_start) per.push_back(to_json(e));
    j["per_start"] = per;
    return j;
}

json to_json(const DensenessCertificate& c) {
    return json{{"R", c.R},
                {"delta", c.delta},
                {"verified", c.verified},
                {"sample_spacing", c.sample_spacing},
                {"worst_point", c.worst_point},
                {"margin", c.margin}};
}

json to_json(const Skeleton& s) {
    return json{{"points", s.points},
                {"separation", s.separation},
                {"cover_radius", s.cover_radius},
                {"source_count", s.source_count},
                {"rejected_count", s.rejected.size()}};
}

json to_json(const CurveResult& c) {
    json pts = json::array();
    for (const auto& [b, l] : c.points) pts.push_back(json{{"beta", b}, {"lambda", l}});
    return json{{"points", pts}, {"nondecreasing", c.nondecreasing}, {"concave", c.concave}};
}

json to_json(const spectral::SpectralResult& r) {
    return json{{"eigenvalues", r.eigenvalues},
                {"residuals", r.residuals},
                {"iterations", r.iterations},
                {"converged", r.converged}};
}

json to_json(const UCPReport& r) {
    json j;
    j["geometry"] = json{{"d", r.d},
                         {"R", r.R},
                         {"delta", r.delta},
                         {"R_G", std::isfinite(r.R_G) ? json(r.R_G) : json("inf")},
                         {"eta0", r.eta0},
                         {"t", r.t},
                         {"input_balls", r.input_balls},
                         {"skeleton_points", r.skeleton_points},
                         {"denseness_margin", r.denseness_margin}};
    j["interval"] = json{{"I_max", r.I_max}};
    j["kappa"] = json{{"final", r.kappa_final},
                      {"first_step", r.kappa_t},
                      {"bls", r.kappa_bls},
                      {"beta0", r.beta0},
                      {"constants",
                       json{{"C", r.kappa_chain.C},
                            {"a", r.kappa_chain.a},
                            {"b", r.kappa_chain.b},
                            {"c", r.kappa_chain.c},
                            {"bracket", r.kappa_chain.bracket}}}};
    j["mu0"] = json{{"numeric", r.mu0_numeric},
                    {"numeric_gradform", r.mu0_numeric_gradform},
                    {"paper_lower", r.mu0_paper_lower}};
    j["lambda_omega"] = json{{"numeric", r.lambda_omega_numeric},
                             {"bessel",
                              std::isfinite(r.lambda_omega_bessel) ? json(r.lambda_omega_bessel)
                                                                   : json("inf")},
                             {"used", r.lambda_omega_used},
                             {"case", r.case_fired},
                             {"witness_radius", r.witness_radius},
                             {"witness_center", r.witness_center},
                             {"witness_shrinks", r.witness_shrinks}};
    auto curve = [](const std::vector<std::pair<double, double>>& pts) {
        json a = json::array();
        for (const auto& [b, l] : pts) a.push_back(json{{"beta", b}, {"lambda", l}});
        return a;
    };
    j["lambda_beta"] = curve(r.lambda_beta);
    j["lambda_beta_work"] = curve(r.lambda_beta_work);
    j["mu_beta"] = curve(r.mu_beta);
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back(json{{"lambda", row.lambda}, {"mass_ratio", row.mass_ratio}, {"pass", row.pass}});
    j["rows"] = rows;
    j["constant_vector"] = json{{"mass_ratio", r.mass_ratio_constant},
                                {"vol_fraction_B", r.vol_fraction_B}};
    j["pass"] = json{{"headline", r.pass_headline},
                     {"constant_margin", r.pass_constant_margin},
                     {"mu0", r.pass_mu0},
                     {"chain", r.pass_chain},
                     {"curve_nondecreasing", r.curve_nondecreasing},
                     {"curve_concave", r.curve_concave},
                     {"bls_certified", r.bls_certified},
                     {"all", r.all_pass()}};
    j["flags"] = json{{"kappa_final_above_bls", r.flag_kappa_final_above_bls}};
    j["provenance"] =
        json{{"h", r.h}, {"refine", r.refine}, {"seed", r.seed}, {"notes", r.notes}};
    return j;
}

std::string rows_csv(const UCPReport& r) {
    std::ostringstream out;
    out << "lambda,mass_ratio,pass\n";
    out.setf(std::ios::scientific);
    out.precision(17);
    for (const auto& row : r.rows)
        out << row.lambda << ',' << row.mass_ratio << ',' << (row.pass ? 1 : 0) << '\n';
    return out.str();
}

} // namespace ucp::report
