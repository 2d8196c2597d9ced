#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ucp/config.hpp"

namespace ucp {

// One experiment of a campaign (also the engine behind the one-shot CLI
// subcommands). `kind` selects the pipeline; keys are kind-specific.
// Declared checks: check_min / check_max on the primary value, check_pass on
// a named boolean flag of the report.
struct ExperimentResult {
    std::string name;
    std::string kind;
    nlohmann::json report;
    double value = 0.0;
    bool checks_declared = false;
    bool checks_ok = true;
    bool failed = false; // solver/config failure, report holds the error
};

ExperimentResult run_experiment(const IniFile::Section& exp, const std::string& base_dir,
                                const std::string& out_dir = ".",
                                std::uint64_t seed_override = 0);

struct CampaignResult {
    std::vector<ExperimentResult> experiments;
    std::string out_dir;
    int exit_code = 0;
};

// Executes experiments in declared order, writes one JSON report per
// experiment plus summary.csv; wall-clock timing goes to a sidecar meta file
// so the reports themselves are byte-reproducible. Nonzero exit iff any
// declared check fails (or an experiment errors out).
CampaignResult run_campaign(const std::string& config_path, const std::string& out_dir,
                            std::uint64_t seed_override = 0);

} // namespace ucp
