#include "sobscale/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "sobscale/interp.hpp"
#include "sobscale/lattice.hpp"
#include "sobscale/linalg.hpp"
#include "sobscale/pdo.hpp"
#include "sobscale/random.hpp"
#include "sobscale/ro.hpp"
#include "sobscale/spaces.hpp"
#include "sobscale/torus.hpp"

namespace sobscale::cli {

namespace {

using nlohmann::json;

class Checks {
public:
    void add(std::string name, bool pass, json details = json::object()) {
        details["name"] = std::move(name);
        details["pass"] = pass;
        list_.push_back(std::move(details));
        all_ = all_ && pass;
    }
    void add(std::string name, const ClaimReport& r) { add(std::move(name), r.pass, r.to_json()); }

    bool all() const { return all_; }
    const json& list() const { return list_; }

private:
    json list_ = json::array();
    bool all_ = true;
};

std::string csv_number(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

/// Rows "check,pass,max_rel_deviation,tolerance" for the checks list.
std::string checks_csv(const json& checks) {
    std::ostringstream out;
    out << "check,pass,max_rel_deviation,tolerance\n";
    for (const auto& c : checks) {
        out << c.at("name").get<std::string>() << ',' << (c.at("pass").get<bool>() ? 1 : 0) << ',';
        if (c.contains("max_rel_deviation")) out << csv_number(c.at("max_rel_deviation").get<double>());
        out << ',';
        if (c.contains("tolerance")) out << csv_number(c.at("tolerance").get<double>());
        out << '\n';
    }
    return out.str();
}

int points_for(const RunConfig& c) { return c.M.value_or(4 * c.N + 3); }

ROFunction phi_or(const std::optional<json>& j, const PositiveFunction& fallback) {
    return j ? ROFunction::from_json(*j) : ROFunction(fallback);
}

double rel(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Named symbols used by commands and presets.
json symbol_identity() { return {{"m", 0}, {"terms", {{{"k_factor", {{"family", "constant"}, {"c", 1.0}}}}}}}; }

json symbol_bracket(double s) { return {{"m", s}, {"terms", {{{"k_factor", {{"family", "bracket_power"}, {"s", s}}}}}}}; }

json symbol_forward_difference() {
    return {{"m", 0},
            {"terms", {{{"x_modes", {{{"q", {1}}, {"coeff", {1.0, 0.0}}}, {{"q", {0}}, {"coeff", {-1.0, 0.0}}}}}}}}};
}

/// <k> + 0.3 cos(2 pi x_1) in dimension n.
json symbol_elliptic(int n) {
    std::vector<int> e1(static_cast<std::size_t>(n), 0), me1(static_cast<std::size_t>(n), 0);
    e1[0] = 1;
    me1[0] = -1;
    return {{"m", 1},
            {"terms",
             {{{"k_factor", {{"family", "bracket_power"}, {"s", 1}}}},
              {{"k_factor", {{"family", "constant"}, {"c", 1.0}}},
               {"x_modes", {{{"q", e1}, {"coeff", {0.15, 0.0}}}, {{"q", me1}, {"coeff", {0.15, 0.0}}}}}}}}};
}

/// <k> (1 + 0.2 cos(2 pi x_1)) in dimension n.
json symbol_perturbed(int n) {
    std::vector<int> zero(static_cast<std::size_t>(n), 0), e1 = zero, me1 = zero;
    e1[0] = 1;
    me1[0] = -1;
    return {{"m", 1},
            {"terms",
             {{{"k_factor", {{"family", "bracket_power"}, {"s", 1}}},
               {"x_modes",
                {{{"q", zero}, {"coeff", {1.0, 0.0}}},
                 {{"q", e1}, {"coeff", {0.1, 0.0}}},
                 {{"q", me1}, {"coeff", {0.1, 0.0}}}}}}}}};
}

/// Direct sum (T_a u)(k) = sum_terms f(<k>) sum_q c_q u(k + q), zero outside the box.
LatticeFunction modal_apply(const Symbol& a, const LatticeFunction& u) {
    const LatticeBox& box = u.box();
    LatticeFunction out(box);
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Point k = box.point(i);
        const double b = japanese_bracket(k);
        for (const auto& t : a.terms()) {
            Complex g = 0.0;
            for (const auto& mode : t.modes) {
                Point shifted = k;
                for (std::size_t j = 0; j < mode.q.size(); ++j) shifted[j] += mode.q[j];
                g += mode.coeff * u.at(shifted);
            }
            out[i] += t.k_factor(b) * g;
        }
    }
    return out;
}

json config_echo(const RunConfig& c) {
    json j = {{"command", c.command}, {"n", c.n}, {"N", c.N}, {"M", points_for(c)}, {"seed", c.seed},
              {"trials", c.trials}, {"format", c.format}};
    if (!c.preset.empty()) j["preset"] = c.preset;
    if (c.symbol) j["symbol"] = *c.symbol;
    if (c.phi) j["phi"] = *c.phi;
    if (c.phi1) j["phi1"] = *c.phi1;
    if (c.psi) j["psi"] = *c.psi;
    return j;
}

// ---- presets -------------------------------------------------------------

void preset_theorem2(const RunConfig& c, Checks& checks) {
    const LatticeBox box(c.n, c.N);
    const std::vector<PositiveFunction> families = {
        PositiveFunction::power(1.5),
        PositiveFunction::power_log(1.5, 1.0),
        PositiveFunction::power_loglog(1.0, 1.0),
        PositiveFunction::exp_sqrt_log(1.0, 1.0),
        PositiveFunction::osc_exponent(1.0, 0.05),
    };
    const std::vector<std::pair<double, double>> straddles = {{0.0, 2.0}, {0.5, 2.5}, {-1.0, 3.0}};
    for (std::size_t f = 0; f < families.size(); ++f) {
        for (std::size_t s = 0; s < straddles.size(); ++s) {
            const auto r = verify_theorem2(ROFunction(families[f]), straddles[s].first, straddles[s].second, box,
                                           c.trials, c.seed + 1000 * f + s);
            checks.add("theorem2/" + families[f].to_json().at("family").get<std::string>() + "/" + std::to_string(s), r);
        }
    }
}

void preset_theorem3(const RunConfig& c, Checks& checks) {
    const LatticeBox box(c.n, c.N);
    using PF = PositiveFunction;
    struct Triple {
        const char* name;
        PF phi0, phi1, psi;
    };
    const std::vector<Triple> triples = {
        {"power", PF::power(1), PF::power(3), PF::power(0.5)},
        {"log_parameter", PF::power(0), PF::power(2), PF::product({PF::power(0.5), PF::log_power(0.5)})},
        {"log_endpoint", PF::power_log(1, -1), PF::power(2), PF::power(1.0 / 3.0)},
        {"loglog_endpoint", PF::power_loglog(0.5, 1), PF::power(2.5), PF::power(0.5)},
        {"constructed_parameter", PF::power(0), PF::exp_sqrt_log(2, 1), PF::interp_parameter(PF::power_log(1, 1), 0, 2)},
    };
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const auto& t = triples[i];
        checks.add(std::string("theorem3/") + t.name,
                   verify_theorem3(ROFunction(t.phi0), ROFunction(t.phi1), InterpParameter(t.psi), box, c.trials,
                                   c.seed + i));
    }

    const AdmissiblePair pair = make_sobolev_pair(0.0, 2.0, box);
    checks.add("reiteration/powers",
               verify_reiteration(pair, InterpParameter(PF::power(0.25)), InterpParameter(PF::power(0.75)),
                                  InterpParameter(PF::power(0.5)), c.trials, c.seed + 100));
    checks.add("reiteration/log",
               verify_reiteration(pair, InterpParameter(PF::power(1.0 / 3.0)),
                                  InterpParameter(PF::product({PF::power(2.0 / 3.0), PF::log_power(-0.25)})),
                                  InterpParameter(PF::power(0.5)), c.trials, c.seed + 101));

    // Interpolation inequality: exact (C = 1) for multipliers, reported for a difference operator.
    LatticeFunction m(box);
    for (std::size_t i = 0; i < box.size(); ++i) m[i] = 1.0 / japanese_bracket(box.point(i));
    const auto diag = interp_operator_bound(m, pair, InterpParameter(PF::power(0.5)));
    checks.add("interpolation_inequality/multiplier", diag.n_psi <= std::max(diag.n0, diag.n1) * (1.0 + 1e-12),
               diag.to_json());
    if (c.n == 1) {
        const LatticeBox small(1, std::min(c.N, 6));
        const Symbol diff = Symbol::from_json(symbol_forward_difference());
        const auto t = pdo_matrix(diff, small, TorusGrid::for_box(small)).entries;
        const auto b = interp_operator_bound(t, make_sobolev_pair(0.0, 1.0, small), InterpParameter(PF::power(0.5)));
        bool agree = b.dense_n_psi && rel(b.n_psi, *b.dense_n_psi) <= 1e-7 && rel(b.n0, *b.dense_n0) <= 1e-7 &&
                     rel(b.n1, *b.dense_n1) <= 1e-7;
        checks.add("interpolation_inequality/forward_difference", agree, b.to_json());
    }
}

void preset_theorem4(const RunConfig& c, Checks& checks) {
    const LatticeBox box(c.n, c.N);
    // (ii) continuous embedding, exact norm of the identity map on the box.
    const double ratio = embedding_ratio(WeightFamily::sobolev(box, 1.0), WeightFamily::sobolev(box, 2.0));
    checks.add("theorem4/embedding_ratio", std::abs(ratio - 1.0) <= 1e-15, {{"ratio", ratio}});

    // (iii) duality pairing of H^phi and H^{1/phi}.
    const ROFunction phi(PositiveFunction::power_log(1.5, 1.0));
    const WeightFamily w = WeightFamily::from_phi(box, phi);
    const WeightFamily w_dual = WeightFamily::from_phi(box, ROFunction(PositiveFunction::reciprocal(phi.expr())));
    double worst = 0.0;
    const CounterRng rng(c.seed);
    for (int t = 0; t < 1000; ++t) {
        const auto u = random_lattice_function(box, rng.substream(2 * static_cast<std::uint64_t>(t)));
        const auto v = random_lattice_function(box, rng.substream(2 * static_cast<std::uint64_t>(t) + 1));
        worst = std::max(worst, std::abs(l2_inner(u, v)) / (h_phi_norm(u, w) * h_phi_norm(v, w_dual)));
    }
    checks.add("theorem4/pairing_bound", worst <= 1.0 + 1e-12, {{"max_ratio", worst}, {"trials", 1000}});

    // (iv) l-infinity embedding for phi = t in one dimension.
    const LatticeBox line(1, c.N);
    const auto emb = linf_embedding_constant(WeightFamily::sobolev(line, 1.0));
    const WeightFamily wt = WeightFamily::sobolev(line, 1.0);
    double max_ratio = 0.0;
    const CounterRng rng2(c.seed, 7);
    for (int t = 0; t < 1000; ++t) {
        const auto u = random_lattice_function(line, rng2.substream(static_cast<std::uint64_t>(t)));
        max_ratio = std::max(max_ratio, lp_norm(u, INFINITY) / (emb.constant * h_phi_norm(u, wt)));
    }
    checks.add("theorem4/linf_embedding", max_ratio <= 1.0 + 1e-12,
               {{"max_ratio", max_ratio}, {"trials", 1000}, {"C_N", emb.constant}});

    const auto big = linf_embedding_constant(WeightFamily::sobolev(LatticeBox(1, 2000), 1.0));
    const double limit = std::numbers::pi / std::tanh(std::numbers::pi);
    const double c2 = big.constant * big.constant;
    checks.add("theorem4/linf_constant_limit", std::abs(c2 - limit) <= 1e-3,
               {{"C_N_squared", c2}, {"limit", limit}, {"N", 2000}, {"trend", big.to_json().at("trend")}});
}

void preset_theorem5(const RunConfig& c, Checks& checks) {
    (void)c;
    const std::vector<int> radii = {4, 8, 16};
    const ROFunction phi_log(PositiveFunction::power_log(1.0, 1.0));
    for (double m : {1.0, -0.5, 2.0}) {
        const auto scan = mapping_norm_scan(Symbol::from_json(symbol_bracket(m)), phi_log, 1, radii);
        double dev = 0.0;
        json rows = json::array();
        for (const auto& [n, v] : scan) {
            dev = std::max(dev, std::abs(v - 1.0));
            rows.push_back({{"N", n}, {"opnorm", v}});
        }
        checks.add("theorem5/multiplier_m=" + csv_number(m), dev <= 1e-12, {{"scan", rows}, {"max_rel_deviation", dev}, {"tolerance", 1e-12}});
    }
    const auto scan = mapping_norm_scan(Symbol::from_json(symbol_forward_difference()), ROFunction(PositiveFunction::power(1.0)), 1, radii);
    json rows = json::array();
    bool ok = true;
    for (std::size_t i = 0; i < scan.size(); ++i) {
        rows.push_back({{"N", scan[i].first}, {"opnorm", scan[i].second}});
        ok = ok && scan[i].second <= 4.0;
        if (i > 0) ok = ok && scan[i].second >= scan[i - 1].second - 1e-12;
    }
    const double last_change = rel(scan[scan.size() - 1].second, scan[scan.size() - 2].second);
    ok = ok && last_change < 0.05;
    checks.add("theorem5/forward_difference", ok, {{"scan", rows}, {"last_change", last_change}});
}

void preset_theorem6(const RunConfig& c, Checks& checks) {
    const LatticeBox box(c.n, c.N);
    const TorusGrid grid = TorusGrid::for_box(box);
    const Symbol elliptic = Symbol::from_json(symbol_elliptic(c.n));
    FredholmOptions opts;
    opts.symmetrize = true;
    opts.seed = c.seed;
    std::vector<int> defects;
    bool ok = true;
    json reports = json::array();
    for (double s : {0.0, 1.0, 2.5}) {
        opts.s_alt = s == 2.5 ? 0.0 : s + 1.0;
        const auto r = fredholm_surrogate(elliptic, s, box, grid, opts);
        ok = ok && r.dim_ker == 0 && r.dim_coker == 0 && r.index == 0 && r.rank_defect == r.rank_defect_alt &&
             r.decomposition_residual <= 1e-10;
        defects.push_back(r.rank_defect);
        reports.push_back(r.to_json());
    }
    ok = ok && std::adjacent_find(defects.begin(), defects.end(), std::not_equal_to<>()) == defects.end();
    checks.add("theorem6/elliptic_symmetrized", ok, {{"reports", reports}});

    for (const auto& [name, sym] : {std::pair<const char*, json>{"identity", symbol_identity()},
                                    std::pair<const char*, json>{"bracket", symbol_bracket(1.0)}}) {
        const auto r = fredholm_surrogate(Symbol::from_json(sym), 0.0, box, grid, {});
        checks.add(std::string("theorem6/") + name, r.dim_ker == 0 && r.dim_coker == 0 && r.index == 0, r.to_json());
    }
}

void preset_theorem7(const RunConfig& c, Checks& checks) {
    const std::vector<int> radii = {4, 8, 16};
    const Symbol bracket = Symbol::from_json(symbol_bracket(1.0));
    auto exact = verify_theorem7(bracket, ROFunction(PositiveFunction::power(1.0)), 1, radii, c.trials, c.seed);
    exact.tolerance = 1e-12;
    exact.pass = exact.pass && exact.max_rel_deviation <= 1e-12;
    checks.add("theorem7/multiplier", exact);

    auto flat = verify_theorem7(Symbol::from_json(symbol_perturbed(1)), ROFunction(PositiveFunction::constant(1.0)), 1,
                                radii, c.trials, c.seed);
    flat.tolerance = 1e-12;
    flat.pass = flat.pass && flat.max_rel_deviation <= 1e-12;
    checks.add("theorem7/constant_phi", flat);

    checks.add("theorem7/perturbed", verify_theorem7(Symbol::from_json(symbol_perturbed(1)),
                                                     ROFunction(PositiveFunction::power(1.0)), 1, radii, c.trials, c.seed));
}

void preset_duality(const RunConfig& c, Checks& checks) {
    const LatticeBox box(c.n, c.N);
    const double s = 1.5;
    const CounterRng rng(c.seed);
    const int pairs = 10000;
    int violations = 0;
    double worst = 0.0;
    for (int t = 0; t < pairs; ++t) {
        const auto u = random_lattice_function(box, rng.substream(2 * static_cast<std::uint64_t>(t)));
        const auto v = random_lattice_function(box, rng.substream(2 * static_cast<std::uint64_t>(t) + 1));
        const auto pb = duality_pairing_bound(u, v, s);
        worst = std::max(worst, std::abs(pb.pairing) / pb.bound);
        violations += std::abs(pb.pairing) > pb.bound * (1.0 + 1e-12);
    }
    checks.add("duality/cauchy_schwarz", violations == 0, {{"pairs", pairs}, {"violations", violations}, {"max_ratio", worst}});

    double dev_sup = 0.0, dev_unit = 0.0, dev_pair = 0.0;
    const CounterRng rng2(c.seed, 1);
    for (int t = 0; t < std::max(c.trials, 1); ++t) {
        const auto u = random_lattice_function(box, rng2.substream(static_cast<std::uint64_t>(t)));
        const auto d = duality_sup(u, s);
        const double norm = sobolev_norm(u, s);
        dev_sup = std::max(dev_sup, rel(d.sup_value, norm));
        dev_unit = std::max(dev_unit, std::abs(sobolev_norm(d.maximizer, -s) - 1.0));
        dev_pair = std::max(dev_pair, std::abs(l2_inner(u, d.maximizer) - Complex(norm)) / norm);
    }
    const double dev = std::max({dev_sup, dev_unit, dev_pair});
    checks.add("duality/sup_formula", dev <= 1e-12,
               {{"max_rel_deviation", dev}, {"tolerance", 1e-12}, {"sup", dev_sup}, {"unit_norm", dev_unit},
                {"pairing", dev_pair}, {"trials", c.trials}});
}

// ---- commands ------------------------------------------------------------

void cmd_ro_analyze(const RunConfig& c, Checks& checks, json& result, std::string& csv) {
    const ROFunction phi = phi_or(c.phi, PositiveFunction::power_log(1.5, 1.0));
    const auto indices = estimate_matuszewska(phi);
    const auto ro = verify_ro(phi, 2.0, 1e6);
    result["matuszewska"] = indices.to_json();
    result["ro_check"] = ro.to_json();
    checks.add("ro/indices_ordered", indices.sigma0 <= indices.sigma1 + 1e-12,
               {{"sigma0", indices.sigma0}, {"sigma1", indices.sigma1}});
    checks.add("ro/bounded_ratios", ro.pass, {{"c", ro.c_estimate}});

    std::ostringstream out;
    out << "t,phi,local_index\n";
    for (double t : log_grid(1.0, 1e6, 8)) {
        out << csv_number(t) << ',' << csv_number(phi(t)) << ',' << csv_number(std::log(phi(2 * t) / phi(t)) / std::log(2.0)) << '\n';
    }
    csv = out.str();
}

void cmd_verify_interp(const RunConfig& c, Checks& checks, json& result, std::string& csv) {
    const LatticeBox box(c.n, c.N);
    ClaimReport r;
    if (c.phi1 || c.psi) {
        if (!(c.phi && c.phi1 && c.psi)) throw UsageError("verify-interp: --phi, --phi1 and --psi go together");
        r = verify_theorem3(ROFunction::from_json(*c.phi), ROFunction::from_json(*c.phi1), InterpParameter::from_json(*c.psi),
                            box, c.trials, c.seed);
    } else {
        r = verify_theorem2(phi_or(c.phi, PositiveFunction::power_log(1.5, 1.0)), c.s0.value_or(1.0), c.s1.value_or(2.0), box,
                            c.trials, c.seed);
    }
    checks.add("interp", r);
    result["interp"] = r.to_json();
    csv = checks_csv(checks.list());
}

void cmd_verify_duality(const RunConfig& c, Checks& checks, json& result, std::string& csv) {
    const LatticeBox box(c.n, c.N);
    const CounterRng rng(c.seed);
    int violations = 0;
    double dev = 0.0, unit = 0.0;
    std::ostringstream out;
    out << "trial,abs_pairing,bound,sup_value,norm\n";
    for (int t = 0; t < c.trials; ++t) {
        const auto u = random_lattice_function(box, rng.substream(2 * static_cast<std::uint64_t>(t)));
        const auto v = random_lattice_function(box, rng.substream(2 * static_cast<std::uint64_t>(t) + 1));
        const auto pb = duality_pairing_bound(u, v, c.s);
        violations += std::abs(pb.pairing) > pb.bound * (1.0 + 1e-12);
        const auto d = duality_sup(u, c.s);
        const double norm = sobolev_norm(u, c.s);
        dev = std::max(dev, rel(d.sup_value, norm));
        unit = std::max(unit, std::abs(sobolev_norm(d.maximizer, -c.s) - 1.0));
        out << t << ',' << csv_number(std::abs(pb.pairing)) << ',' << csv_number(pb.bound) << ','
            << csv_number(d.sup_value) << ',' << csv_number(norm) << '\n';
    }
    checks.add("duality/cauchy_schwarz", violations == 0, {{"violations", violations}, {"pairs", c.trials}});
    checks.add("duality/sup_formula", dev <= 1e-12 && unit <= 1e-12,
               {{"max_rel_deviation", std::max(dev, unit)}, {"tolerance", 1e-12}});
    result["s"] = c.s;
    csv = out.str();
}

void cmd_pdo_apply(const RunConfig& c, Checks& checks, json& result, std::string& csv) {
    const LatticeBox box(c.n, c.N);
    const TorusGrid grid(c.n, points_for(c));
    const Symbol a = Symbol::from_json(c.symbol.value_or(symbol_identity()));
    const auto u = random_lattice_function(box, CounterRng(c.seed));
    PdoDiagnostics diag;
    const auto tu = pdo_apply(a, u, grid, &diag);
    const auto direct = modal_apply(a, u);
    const double residual = lp_norm(tu - direct, 2.0) / std::max(lp_norm(direct, 2.0), 1e-300);
    checks.add("pdo_apply/direct_sum_agreement", residual <= 1e-12,
               {{"max_rel_deviation", residual}, {"tolerance", 1e-12}});
    result["leakage"] = diag.leakage;
    if (!diag.warnings.empty()) result["warnings"] = diag.warnings;
    result["input"] = to_json(u);
    result["output"] = to_json(tu);
    std::ostringstream out;
    write_csv(out, tu);
    csv = out.str();
}

void cmd_symbol_check(const RunConfig& c, Checks& checks, json& result, std::string& csv) {
    const LatticeBox box(c.n, c.N);
    const TorusGrid grid(c.n, points_for(c));
    const Symbol a = Symbol::from_json(c.symbol.value_or(symbol_bracket(1.0)));
    const auto est = symbol_class_estimate(a, box, grid, c.max_alpha, c.max_beta);
    result["estimates"] = est.to_json();
    checks.add("symbol/consistent_with_order", est.consistent);
    std::ostringstream out;
    out << "alpha,beta,C,slope\n";
    for (const auto& e : est.entries) {
        auto join = [](const MultiIndex& m) {
            std::string s;
            for (std::size_t i = 0; i < m.size(); ++i) s += (i ? ";" : "") + std::to_string(m[i]);
            return s;
        };
        out << join(e.alpha) << ',' << join(e.beta) << ',' << csv_number(e.c) << ',' << (e.slope ? csv_number(*e.slope) : "") << '\n';
    }
    csv = out.str();
}

std::vector<int> radii_for(const RunConfig& c) {
    if (!c.radii.empty()) return c.radii;
    return {std::max(1, c.N / 2), c.N};
}

void cmd_mapping_scan(const RunConfig& c, Checks& checks, json& result, std::string& csv) {
    const Symbol a = Symbol::from_json(c.symbol.value_or(symbol_forward_difference()));
    const ROFunction phi = phi_or(c.phi, PositiveFunction::power(1.0));
    const auto scan = mapping_norm_scan(a, phi, c.n, radii_for(c));
    json rows = json::array();
    std::ostringstream out;
    out << "N,opnorm\n";
    for (const auto& [n, v] : scan) {
        rows.push_back({{"N", n}, {"opnorm", v}});
        out << n << ',' << csv_number(v) << '\n';
    }
    result["scan"] = rows;
    const double change = scan.size() > 1 ? rel(scan.back().second, scan[scan.size() - 2].second) : 0.0;
    checks.add("mapping/stabilizes", change < 0.05, {{"last_change", change}});
    csv = out.str();
}

void cmd_fredholm(const RunConfig& c, Checks& checks, json& result, std::string& csv) {
    const LatticeBox box(c.n, c.N);
    const TorusGrid grid(c.n, points_for(c));
    const Symbol a = Symbol::from_json(c.symbol.value_or(symbol_elliptic(c.n)));
    FredholmOptions opts;
    opts.seed = c.seed;
    opts.symmetrize = !c.symbol;
    const auto r = fredholm_surrogate(a, c.s, box, grid, opts);
    result["fredholm"] = r.to_json();
    checks.add("fredholm/rank_defect_s_independent", r.rank_defect == r.rank_defect_alt);
    checks.add("fredholm/range_kernel_decomposition", r.decomposition_residual <= 1e-10,
               {{"residual", r.decomposition_residual}});
    std::ostringstream out;
    out << "index,singular_value\n";
    for (Eigen::Index i = 0; i < r.smallest_singulars.size(); ++i) out << i << ',' << csv_number(r.smallest_singulars(i)) << '\n';
    csv = out.str();
}

void cmd_a_scale(const RunConfig& c, Checks& checks, json& result, std::string& csv) {
    const Symbol a = Symbol::from_json(c.symbol.value_or(symbol_perturbed(c.n)));
    const ROFunction phi = phi_or(c.phi, PositiveFunction::power(1.0));
    const auto r = verify_theorem7(a, phi, c.n, radii_for(c), c.trials, c.seed);
    checks.add("a_scale/norm_equivalence", r);
    result["theorem7"] = r.to_json();
    std::ostringstream out;
    out << "N,min,max,width,exact_min,exact_max\n";
    for (const auto& b : r.extra.at("bands")) {
        out << b.at("N").get<int>() << ',' << csv_number(b.at("min")) << ',' << csv_number(b.at("max")) << ','
            << csv_number(b.at("width")) << ',' << csv_number(b.at("exact_min")) << ',' << csv_number(b.at("exact_max")) << '\n';
    }
    csv = out.str();
}

void cmd_suite(const RunConfig& c, Checks& checks, json& result, std::string& csv) {
    if (c.preset.empty()) throw UsageError("suite: --preset is required (one of theorem2, theorem3, theorem4, theorem5, theorem6-surrogate, theorem7, appendix-duality)");
    if (c.preset == "theorem2") preset_theorem2(c, checks);
    else if (c.preset == "theorem3") preset_theorem3(c, checks);
    else if (c.preset == "theorem4") preset_theorem4(c, checks);
    else if (c.preset == "theorem5") preset_theorem5(c, checks);
    else if (c.preset == "theorem6-surrogate") preset_theorem6(c, checks);
    else if (c.preset == "theorem7") preset_theorem7(c, checks);
    else if (c.preset == "appendix-duality") preset_duality(c, checks);
    else throw UsageError("suite: unknown preset '" + c.preset + "'");
    result["preset"] = c.preset;
    csv = checks_csv(checks.list());
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

}  // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> list = {"ro-analyze",  "verify-interp", "verify-duality", "pdo-apply", "symbol-check",
                                                  "mapping-scan", "fredholm",     "a-scale",        "suite"};
    return list;
}

const std::vector<std::string>& presets() {
    static const std::vector<std::string> list = {"theorem2", "theorem3", "theorem4", "theorem5", "theorem6-surrogate",
                                                  "theorem7", "appendix-duality"};
    return list;
}

void validate(const RunConfig& c) {
    if (std::find(commands().begin(), commands().end(), c.command) == commands().end()) {
        throw UsageError("unknown command '" + c.command + "'");
    }
    if (c.n < 1 || c.n > 3) throw UsageError("n must be 1, 2 or 3");
    if (c.N < 1) throw UsageError("N must be at least 1");
    if (c.n == 2 && c.N > 32) throw UsageError("N must be at most 32 for n = 2 (dense-matrix memory guard)");
    if (c.n == 3 && c.N > 8) throw UsageError("N must be at most 8 for n = 3 (dense-matrix memory guard)");
    if (c.M) {
        const int least = 2 * (2 * c.N + 1) - 1;
        if (*c.M % 2 == 0 || *c.M < least) {
            throw UsageError("M = " + std::to_string(*c.M) + " violates the Nyquist rule: M must be odd and at least 2(2N+1)-1 = " +
                             std::to_string(least));
        }
    }
    if (c.trials < 1) throw UsageError("trials must be positive");
    if (c.format != "json" && c.format != "csv") throw UsageError("format must be json or csv");
    if (c.max_alpha < 0 || c.max_beta < 0) throw UsageError("derivative orders must be non-negative");
    for (int r : c.radii) {
        if (r < 1) throw UsageError("radii must be positive");
    }
    if (c.command == "suite" && !c.preset.empty() &&
        std::find(presets().begin(), presets().end(), c.preset) == presets().end()) {
        throw UsageError("unknown preset '" + c.preset + "'");
    }
}

RunResult execute(const RunConfig& c) {
    validate(c);
    Checks checks;
    json result = json::object();
    std::string csv;
    try {
        if (c.command == "ro-analyze") cmd_ro_analyze(c, checks, result, csv);
        else if (c.command == "verify-interp") cmd_verify_interp(c, checks, result, csv);
        else if (c.command == "verify-duality") cmd_verify_duality(c, checks, result, csv);
        else if (c.command == "pdo-apply") cmd_pdo_apply(c, checks, result, csv);
        else if (c.command == "symbol-check") cmd_symbol_check(c, checks, result, csv);
        else if (c.command == "mapping-scan") cmd_mapping_scan(c, checks, result, csv);
        else if (c.command == "fredholm") cmd_fredholm(c, checks, result, csv);
        else if (c.command == "a-scale") cmd_a_scale(c, checks, result, csv);
        else cmd_suite(c, checks, result, csv);
    } catch (const ParameterError& e) {
        throw UsageError(e.what());
    } catch (const ResolutionError& e) {
        throw UsageError(e.what());
    } catch (const DimensionError& e) {
        throw UsageError(e.what());
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    } catch (const CapabilityError& e) {
        throw UsageError(e.what());
    }

    RunResult out;
    out.report = {{"schema", kSchema},
                  {"config", config_echo(c)},
                  {"rng", CounterRng::kName},
                  {"result", std::move(result)},
                  {"checks", checks.list()},
                  {"pass", checks.all()}};
    out.csv = std::move(csv);
    out.exit_code = checks.all() ? 0 : 1;
    return out;
}

nlohmann::json load_json_argument(const std::string& value) {
    try {
        if (!value.empty() && value.front() == '{') return json::parse(value);
        std::ifstream in(value);
        if (!in) throw UsageError("cannot open '" + value + "'");
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("invalid JSON in '" + value + "': " + e.what());
    }
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    RunResult result;
    try {
        result = execute(config);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    const std::string body = config.format == "csv" ? result.csv : result.report.dump(2) + "\n";
    if (config.out.empty()) {
        out << body;
    } else {
        std::ofstream file(config.out, std::ios::binary);
        if (!file) {
            err << "error: cannot write '" << config.out << "'\n";
            return 2;
        }
        file << body;
        std::ofstream meta(config.out + ".meta.json", std::ios::binary);
        meta << json{{"schema", kSchema}, {"generated_at", timestamp()}, {"threads", worker_count()}}.dump(2) << "\n";
    }
    if (result.exit_code != 0) err << "one or more checks failed\n";
    return result.exit_code;
}

}  // namespace sobscale::cli
