#pragma once

#include <json.hpp>

#include "nsgame/game.hpp"

namespace nsg {

struct SuiteConfig {
    std::uint64_t seed = 20240917;
    double scale = 1.0;  // multiplies the per-criterion case counts
    std::vector<std::string> criteria;  // empty vector from JSON means "none"
    bool all = true;                    // default config runs everything

    static SuiteConfig from_json(const nlohmann::json& j);
};

struct CriterionResult {
    std::string name;
    bool pass = true;
    long long cases = 0;
    double worst_margin = 0.0;  // <= 0 means all assertions held with room
    std::string note;
};

struct SuiteSummary {
    std::vector<CriterionResult> results;
    bool all_pass = true;

    nlohmann::json to_json() const;
};

// Runs the acceptance criteria; failures are reported in the summary, never
// thrown.  Deterministic in the config.
SuiteSummary run_experiment_suite(const SuiteConfig& config);

const std::vector<std::string>& suite_criterion_names();

}  // namespace nsg
