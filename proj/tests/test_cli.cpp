#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sobscale/cli.hpp"

using namespace sobscale::cli;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("sobscale_test_" + std::to_string(std::hash<std::string>{}(
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name())));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Exit status of the CLI binary with the given arguments.
int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + SOBSCALE_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig config(std::string command) {
    RunConfig c;
    c.command = std::move(command);
    return c;
}

}  // namespace

TEST(Validate, AcceptsDefaults) {
    for (const auto& cmd : commands()) {
        if (cmd == "suite") continue;
        EXPECT_NO_THROW(validate(config(cmd))) << cmd;
    }
}

TEST(Validate, NyquistRule) {
    auto c = config("pdo-apply");
    c.N = 4;
    c.M = 18;
    try {
        validate(c);
        FAIL() << "expected UsageError";
    } catch (const UsageError& e) {
        EXPECT_NE(std::string(e.what()).find("Nyquist"), std::string::npos);
    }
    c.M = 15;
    EXPECT_THROW(validate(c), UsageError);
    c.M = 17;
    EXPECT_NO_THROW(validate(c));
}

TEST(Validate, ShapeGuards) {
    auto c = config("ro-analyze");
    c.n = 4;
    EXPECT_THROW(validate(c), UsageError);
    c.n = 2;
    c.N = 33;
    EXPECT_THROW(validate(c), UsageError);
    c.n = 3;
    c.N = 9;
    EXPECT_THROW(validate(c), UsageError);
    c.N = 8;
    EXPECT_NO_THROW(validate(c));
    c.trials = 0;
    EXPECT_THROW(validate(c), UsageError);
    c.trials = 1;
    c.format = "xml";
    EXPECT_THROW(validate(c), UsageError);
    EXPECT_THROW(validate(config("nope")), UsageError);
    auto s = config("suite");
    s.preset = "theorem99";
    EXPECT_THROW(validate(s), UsageError);
}

TEST(Execute, ReportShape) {
    auto c = config("ro-analyze");
    const auto r = execute(c);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.report.at("schema"), kSchema);
    EXPECT_TRUE(r.report.at("pass").get<bool>());
    EXPECT_TRUE(r.report.at("checks").is_array());
    EXPECT_EQ(r.report.at("config").at("command"), "ro-analyze");
    EXPECT_FALSE(r.report.at("config").contains("out"));
    EXPECT_TRUE(r.report.at("rng").is_string());
}

TEST(Execute, PdoApplyIdentity) {
    auto c = config("pdo-apply");
    c.n = 2;
    c.N = 4;
    const auto r = execute(c);
    EXPECT_EQ(r.exit_code, 0);
    const auto& in = r.report.at("result").at("input").at("values");
    const auto& out = r.report.at("result").at("output").at("values");
    ASSERT_EQ(in.size(), out.size());
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const double dr = in[i][0].get<double>() - out[i][0].get<double>();
        const double di = in[i][1].get<double>() - out[i][1].get<double>();
        worst = std::max(worst, std::hypot(dr, di));
        scale = std::max(scale, std::hypot(in[i][0].get<double>(), in[i][1].get<double>()));
    }
    EXPECT_LE(worst / scale, 1e-13);
    EXPECT_LE(r.report.at("checks")[0].at("max_rel_deviation").get<double>(), 1e-13);
}

TEST(Execute, ShiftSymbolMatchesDirectSum) {
    auto c = config("pdo-apply");
    c.N = 6;
    c.symbol = json::parse(R"({"m":0,"terms":[{"x_modes":[{"q":[1],"coeff":[1,0]}]}]})");
    const auto r = execute(c);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_GT(r.report.at("result").at("leakage").get<double>(), 0.0);
}

TEST(Execute, PdoApplyUndersampledIsUsageError) {
    auto c = config("pdo-apply");
    c.N = 4;
    c.M = 17;
    c.symbol = json::parse(R"({"m":0,"terms":[{"x_modes":[{"q":[5],"coeff":[1,0]}]}]})");
    EXPECT_THROW(execute(c), UsageError);
}

TEST(Execute, InconsistentSymbolFailsCheck) {
    auto c = config("symbol-check");
    c.N = 16;
    c.symbol = json::parse(R"({"m":0,"terms":[{"k_factor":{"family":"bracket_power","s":2}}]})");
    const auto r = execute(c);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_FALSE(r.report.at("pass").get<bool>());
}

TEST(Execute, EveryCommandRuns) {
    for (const auto& cmd : commands()) {
        auto c = config(cmd);
        c.trials = 5;
        if (cmd == "suite") c.preset = "theorem5";
        if (cmd == "symbol-check") c.N = 32;
        const auto r = execute(c);
        EXPECT_EQ(r.exit_code, 0) << cmd << "\n" << r.report.dump(2);
        EXPECT_FALSE(r.csv.empty()) << cmd;
    }
}

TEST(Execute, VerifyInterpTriple) {
    auto c = config("verify-interp");
    c.phi = json::parse(R"({"family":"power","s":1})");
    c.phi1 = json::parse(R"({"family":"power","s":3})");
    c.psi = json::parse(R"({"family":"power","s":0.5})");
    c.trials = 20;
    const auto r = execute(c);
    EXPECT_EQ(r.exit_code, 0);
    c.psi.reset();
    EXPECT_THROW(execute(c), UsageError);
}

TEST(Execute, Deterministic) {
    auto c = config("suite");
    c.preset = "theorem7";
    c.trials = 20;
    EXPECT_EQ(execute(c).report.dump(), execute(c).report.dump());
    auto d = c;
    d.seed = 43;
    EXPECT_NE(execute(c).report.dump(), execute(d).report.dump());
}

TEST(LoadJsonArgument, InlineAndFile) {
    EXPECT_EQ(load_json_argument(R"({"family":"power","s":1})").at("s"), 1);
    TempDir dir;
    const auto path = dir / "phi.json";
    std::ofstream(path) << R"({"family":"constant","c":2})";
    EXPECT_EQ(load_json_argument(path.string()).at("c"), 2);
    EXPECT_THROW(load_json_argument((dir / "missing.json").string()), UsageError);
    EXPECT_THROW(load_json_argument("{not json"), UsageError);
}

TEST(Run, WritesReportAndSidecar) {
    TempDir dir;
    auto c = config("ro-analyze");
    c.out = (dir / "report.json").string();
    std::ostringstream out, err;
    EXPECT_EQ(run(c, out, err), 0);
    const auto report = json::parse(slurp(dir / "report.json"));
    EXPECT_EQ(report.at("schema"), kSchema);
    const auto meta = json::parse(slurp(dir / "report.json.meta.json"));
    EXPECT_TRUE(meta.contains("generated_at"));
    EXPECT_FALSE(report.contains("generated_at"));
}

TEST(Run, CsvFormat) {
    auto c = config("mapping-scan");
    c.format = "csv";
    c.radii = {4, 8};
    std::ostringstream out, err;
    EXPECT_EQ(run(c, out, err), 0);
    EXPECT_EQ(out.str().rfind("N,opnorm\n", 0), 0u);
}

TEST(Binary, ExitCodes) {
    EXPECT_EQ(run_cli("ro-analyze"), 0);
    EXPECT_EQ(run_cli("pdo-apply --N 4 --M 18"), 2);
    EXPECT_EQ(run_cli("pdo-apply --n 5"), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli("--N 4"), 2);
    EXPECT_EQ(run_cli("suite --preset nope"), 2);
    EXPECT_EQ(run_cli("ro-analyze --phi /nonexistent/phi.json"), 2);
    EXPECT_EQ(run_cli(R"(symbol-check --N 16 --symbol '{"m":0,"terms":[{"k_factor":{"family":"bracket_power","s":2}}]}')"),
              1);
}

TEST(Binary, ByteIdenticalReports) {
    TempDir dir;
    const auto a = dir / "a.json", b = dir / "b.json";
    ASSERT_EQ(run_cli("suite --preset theorem5 --seed 42 --out " + a.string()), 0);
    ASSERT_EQ(run_cli("suite --preset theorem5 --seed 42 --out " + b.string()), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_FALSE(slurp(a).empty());
    EXPECT_TRUE(fs::exists(dir / "a.json.meta.json"));
}
