#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace sobscale {

/// Outcome of one verification driver: {claim, parameters, trials, max_rel_deviation, pass}.
struct ClaimReport {
    std::string claim;
    nlohmann::json parameters = nlohmann::json::object();
    int trials = 0;
    double max_rel_deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::vector<std::string> warnings;
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const {
        nlohmann::json j = {{"claim", claim},
                            {"parameters", parameters},
                            {"trials", trials},
                            {"max_rel_deviation", max_rel_deviation},
                            {"tolerance", tolerance},
                            {"pass", pass}};
        if (!warnings.empty()) j["warnings"] = warnings;
        if (!extra.empty()) j["extra"] = extra;
        return j;
    }
};

}  // namespace sobscale
