#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sobscale/cli.hpp"

int main(int argc, char** argv) {
    using sobscale::cli::load_json_argument;
    sobscale::cli::RunConfig config;
    std::string symbol, phi, phi1, psi;
    double s0 = 0.0, s1 = 0.0;

    CLI::App app{"Weighted lattice spaces, interpolation and pseudo-differential operator checks"};
    app.add_option("command", config.command, "ro-analyze | verify-interp | verify-duality | pdo-apply | symbol-check | "
                                              "mapping-scan | fredholm | a-scale | suite")
        ->required();
    app.add_option("--preset", config.preset,
                   "suite preset: theorem2 | theorem3 | theorem4 | theorem5 | theorem6-surrogate | theorem7 | appendix-duality");
    app.add_option("--n", config.n, "lattice dimension (1..3)");
    app.add_option("--N", config.N, "box radius");
    app.add_option("--M", config.M, "torus points per axis (odd, >= 4N+1)");
    app.add_option("--seed", config.seed, "random seed");
    app.add_option("--trials", config.trials, "random trials");
    app.add_option("--symbol", symbol, "symbol JSON file (or inline JSON)");
    app.add_option("--phi", phi, "weight function JSON file (or inline JSON)");
    app.add_option("--phi1", phi1, "second weight function for verify-interp");
    app.add_option("--psi", psi, "interpolation parameter JSON for verify-interp");
    app.add_option("--s", config.s, "smoothness index");
    auto* s0_opt = app.add_option("--s0", s0, "lower Sobolev index for verify-interp");
    auto* s1_opt = app.add_option("--s1", s1, "upper Sobolev index for verify-interp");
    app.add_option("--radii", config.radii, "box radii for scans");
    app.add_option("--max-alpha", config.max_alpha, "difference order for symbol-check");
    app.add_option("--max-beta", config.max_beta, "derivative order for symbol-check");
    app.add_option("--out", config.out, "report path (stdout if omitted)");
    app.add_option("--format", config.format, "json | csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!symbol.empty()) config.symbol = load_json_argument(symbol);
        if (!phi.empty()) config.phi = load_json_argument(phi);
        if (!phi1.empty()) config.phi1 = load_json_argument(phi1);
        if (!psi.empty()) config.psi = load_json_argument(psi);
    } catch (const sobscale::cli::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }
    if (s0_opt->count()) config.s0 = s0;
    if (s1_opt->count()) config.s1 = s1;

    return sobscale::cli::run(config, std::cout, std::cerr);
}
