#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sobscale/error.hpp"

namespace sobscale::cli {

inline constexpr const char* kSchema = "sobscale/1";

/// Invalid configuration; maps to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::string command;
    std::string preset;
    int n = 1;
    int N = 8;
    /// Points per torus axis; 4N+3 when unset.
    std::optional<int> M;
    std::uint64_t seed = 42;
    int trials = 200;
    std::optional<nlohmann::json> symbol;
    std::optional<nlohmann::json> phi;
    std::optional<nlohmann::json> phi1;
    std::optional<nlohmann::json> psi;
    double s = 1.0;
    std::optional<double> s0;
    std::optional<double> s1;
    std::vector<int> radii;
    int max_alpha = 2;
    int max_beta = 2;
    /// Report path; stdout when empty.
    std::string out;
    std::string format = "json";
};

const std::vector<std::string>& commands();
const std::vector<std::string>& presets();

/// Throws UsageError naming the violated rule.
void validate(const RunConfig& config);

struct RunResult {
    int exit_code = 0;
    nlohmann::json report;
    /// Plot-ready rows when format is csv.
    std::string csv;
};

/// Runs the configured command without touching the filesystem.
RunResult execute(const RunConfig& config);

/// validate + execute + write the report (and a `<out>.meta.json` sidecar
/// holding the run timestamp). Returns 0 if every check passed, 1 if some
/// check failed, 2 for an invalid configuration.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// JSON from a file path, or inline when the text starts with '{'.
nlohmann::json load_json_argument(const std::string& value);

}  // namespace sobscale::cli
