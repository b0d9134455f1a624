#include "sobscale/ro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sobscale/error.hpp"

namespace sobscale {

struct PositiveFunction::Node {
    Kind kind;
    double a = 0.0;  // s / r / c / p / s0 depending on kind
    double b = 0.0;  // r / c / amp / s1 depending on kind
    std::vector<PositiveFunction> args;
};

namespace {

using Kind = PositiveFunction::Kind;

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void require_exponents(double s0, double s1, const char* what) {
    if (!(s0 < s1)) {
        throw ParameterError(std::string(what) + ": need s0 < s1, got s0 = " + format_double(s0) +
                             ", s1 = " + format_double(s1));
    }
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double num(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ParameterError(std::string("function JSON: missing field '") + key + "'");
    return j.at(key).get<double>();
}

}  // namespace

PositiveFunction PositiveFunction::power(double s) {
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::power, s, 0.0, {}}));
}
PositiveFunction PositiveFunction::power_log(double s, double r) {
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::power_log, s, r, {}}));
}
PositiveFunction PositiveFunction::power_loglog(double s, double r) {
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::power_loglog, s, r, {}}));
}
PositiveFunction PositiveFunction::exp_sqrt_log(double s, double c) {
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::exp_sqrt_log, s, c, {}}));
}
PositiveFunction PositiveFunction::osc_exponent(double s, double amp) {
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::osc_exponent, s, amp, {}}));
}
PositiveFunction PositiveFunction::log_power(double r) {
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::log_power, r, 0.0, {}}));
}
PositiveFunction PositiveFunction::cap(double c) {
    if (!(c > 0)) throw ParameterError("cap: level must be positive");
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::cap, c, 0.0, {}}));
}
PositiveFunction PositiveFunction::constant(double c) {
    if (!(c > 0) || !std::isfinite(c)) throw ParameterError("constant: value must be positive and finite");
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::constant, c, 0.0, {}}));
}
PositiveFunction PositiveFunction::product(std::vector<PositiveFunction> factors) {
    if (factors.empty()) throw ParameterError("product: needs at least one factor");
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::product, 0.0, 0.0, std::move(factors)}));
}
PositiveFunction PositiveFunction::power_of(PositiveFunction f, double p) {
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::power_of, p, 0.0, {std::move(f)}}));
}
PositiveFunction PositiveFunction::reciprocal(PositiveFunction f) {
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::reciprocal, 0.0, 0.0, {std::move(f)}}));
}
PositiveFunction PositiveFunction::compose_quadratic(PositiveFunction f0, PositiveFunction f1,
                                                     PositiveFunction psi) {
    return PositiveFunction(std::make_shared<const Node>(
        Node{Kind::compose_quadratic, 0.0, 0.0, {std::move(f0), std::move(f1), std::move(psi)}}));
}
PositiveFunction PositiveFunction::interp_parameter(PositiveFunction phi, double s0, double s1) {
    require_exponents(s0, s1, "interp_parameter");
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::interp_parameter, s0, s1, {std::move(phi)}}));
}
PositiveFunction PositiveFunction::reconstruct(PositiveFunction psi, double s0, double s1) {
    require_exponents(s0, s1, "reconstruct");
    return PositiveFunction(std::make_shared<const Node>(Node{Kind::reconstruct, s0, s1, {std::move(psi)}}));
}

PositiveFunction::Kind PositiveFunction::kind() const { return node_->kind; }

double PositiveFunction::operator()(double t) const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::power:
            return std::pow(t, n.a);
        case Kind::power_log:
            return std::pow(t, n.a) * std::pow(std::log(std::numbers::e + t), n.b);
        case Kind::power_loglog:
            return std::pow(t, n.a) * std::pow(std::log(std::numbers::e + std::log(std::numbers::e + t)), n.b);
        case Kind::exp_sqrt_log:
            return std::pow(t, n.a) * std::exp(n.b * std::sqrt(std::log(std::max(t, 1.0))));
        case Kind::osc_exponent:
            return std::pow(t, n.a + n.b * std::sin(std::log(t)));
        case Kind::log_power:
            return std::pow(1.0 + std::log(std::max(t, 1.0)), n.a);
        case Kind::cap:
            return std::min(t, n.a);
        case Kind::constant:
            return n.a;
        case Kind::product: {
            double v = 1.0;
            for (const auto& f : n.args) v *= f(t);
            return v;
        }
        case Kind::power_of:
            return std::pow(n.args[0](t), n.a);
        case Kind::reciprocal:
            return 1.0 / n.args[0](t);
        case Kind::compose_quadratic: {
            const double f0 = n.args[0](t);
            return f0 * n.args[2](n.args[1](t) / f0);
        }
        case Kind::interp_parameter: {
            const PositiveFunction& phi = n.args[0];
            if (t < 1.0) return phi(1.0);
            const double d = n.b - n.a;
            return std::pow(t, -n.a / d) * phi(std::pow(t, 1.0 / d));
        }
        case Kind::reconstruct:
            return std::pow(t, n.a) * n.args[0](std::pow(t, n.b - n.a));
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double PositiveFunction::evaluate(double t) const {
    const double v = (*this)(t);
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError("function evaluated to " + format_double(v) + " at t = " + format_double(t) +
                          " (must be positive and finite)");
    }
    return v;
}

nlohmann::json PositiveFunction::to_json() const {
    const Node& n = *node_;
    auto args = [&] {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& f : n.args) a.push_back(f.to_json());
        return a;
    };
    switch (n.kind) {
        case Kind::power: return {{"family", "power"}, {"s", n.a}};
        case Kind::power_log: return {{"family", "power_log"}, {"s", n.a}, {"r", n.b}};
        case Kind::power_loglog: return {{"family", "power_loglog"}, {"s", n.a}, {"r", n.b}};
        case Kind::exp_sqrt_log: return {{"family", "exp_sqrt_log"}, {"s", n.a}, {"c", n.b}};
        case Kind::osc_exponent: return {{"family", "osc_exponent"}, {"s", n.a}, {"amp", n.b}};
        case Kind::log_power: return {{"family", "log_power"}, {"r", n.a}};
        case Kind::cap: return {{"family", "cap"}, {"c", n.a}};
        case Kind::constant: return {{"family", "constant"}, {"c", n.a}};
        case Kind::product: return {{"op", "product"}, {"args", args()}};
        case Kind::power_of: return {{"op", "power"}, {"p", n.a}, {"args", args()}};
        case Kind::reciprocal: return {{"op", "reciprocal"}, {"args", args()}};
        case Kind::compose_quadratic: return {{"op", "compose_quadratic"}, {"args", args()}};
        case Kind::interp_parameter: return {{"op", "interp_parameter"}, {"s0", n.a}, {"s1", n.b}, {"args", args()}};
        case Kind::reconstruct: return {{"op", "reconstruct"}, {"s0", n.a}, {"s1", n.b}, {"args", args()}};
    }
    return nullptr;
}

PositiveFunction PositiveFunction::from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object()) throw ParameterError("function JSON: expected an object");
        if (j.contains("family")) {
            const auto fam = j.at("family").get<std::string>();
            if (fam == "power") return power(num(j, "s"));
            if (fam == "power_log") return power_log(num(j, "s"), j.value("r", 1.0));
            if (fam == "power_loglog") return power_loglog(num(j, "s"), j.value("r", 1.0));
            if (fam == "exp_sqrt_log") return exp_sqrt_log(num(j, "s"), j.value("c", 1.0));
            if (fam == "osc_exponent") return osc_exponent(num(j, "s"), num(j, "amp"));
            if (fam == "log_power") return log_power(num(j, "r"));
            if (fam == "cap") return cap(num(j, "c"));
            if (fam == "constant") return constant(num(j, "c"));
            throw ParameterError("function JSON: unknown family '" + fam + "'");
        }
        if (j.contains("op")) {
            const auto op = j.at("op").get<std::string>();
            std::vector<PositiveFunction> args;
            if (j.contains("args")) {
                for (const auto& a : j.at("args")) args.push_back(from_json(a));
            }
            auto arity = [&](std::size_t n) {
                if (args.size() != n) {
                    throw ParameterError("function JSON: op '" + op + "' expects " + std::to_string(n) +
                                         " argument(s), got " + std::to_string(args.size()));
                }
            };
            if (op == "product") return product(std::move(args));
            if (op == "power") { arity(1); return power_of(args[0], num(j, "p")); }
            if (op == "reciprocal") { arity(1); return reciprocal(args[0]); }
            if (op == "compose_quadratic") { arity(3); return compose_quadratic(args[0], args[1], args[2]); }
            if (op == "interp_parameter") { arity(1); return interp_parameter(args[0], num(j, "s0"), num(j, "s1")); }
            if (op == "reconstruct") { arity(1); return reconstruct(args[0], num(j, "s0"), num(j, "s1")); }
            throw ParameterError("function JSON: unknown op '" + op + "'");
        }
        throw ParameterError("function JSON: object needs a 'family' or an 'op' field");
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("function JSON: ") + e.what());
    }
}

ROFunction::ROFunction(PositiveFunction f, std::optional<RoBounds> declared)
    : expr_(std::move(f)), declared_(declared) {
    if (declared_) {
        if (!(declared_->s0 <= declared_->s1)) throw ParameterError("ROFunction: declared s0 must be <= s1");
        if (!(declared_->c >= 1.0)) throw ParameterError("ROFunction: declared c must be >= 1");
    }
}

ROFunction ROFunction::from_json(const nlohmann::json& j) {
    std::optional<RoBounds> declared;
    if (j.is_object() && j.contains("declared")) {
        const auto& d = j.at("declared");
        declared = RoBounds{d.at("s0").get<double>(), d.at("s1").get<double>(), d.value("c", 1.0)};
    }
    return ROFunction(PositiveFunction::from_json(j), declared);
}

double ROFunction::operator()(double t) const {
    if (!(t >= 1.0)) throw DomainError("RO function queried at t = " + format_double(t) + " < 1");
    return expr_.evaluate(t);
}

InterpParameter::InterpParameter(PositiveFunction f, ParameterProvenance provenance,
                                 std::optional<std::pair<double, double>> exponents)
    : expr_(std::move(f)), provenance_(provenance), exponents_(exponents) {}

InterpParameter InterpParameter::from_json(const nlohmann::json& j) {
    return InterpParameter(PositiveFunction::from_json(j));
}

double InterpParameter::operator()(double tau) const {
    if (!(tau > 0.0)) throw DomainError("interpolation parameter queried at tau = " + format_double(tau) + " <= 0");
    return expr_.evaluate(tau);
}

nlohmann::json InterpParameter::to_json() const {
    nlohmann::json j = {{"function", expr_.to_json()}};
    if (provenance_ == ParameterProvenance::constructed_from_phi) {
        j["provenance"] = {{"kind", "constructed_from_phi"}, {"s0", exponents_->first}, {"s1", exponents_->second}};
    } else {
        j["provenance"] = {{"kind", "user_supplied"}};
    }
    return j;
}

nlohmann::json SampleGrid::to_json() const {
    return {{"t_min", t_min},           {"t_max", t_max},           {"t_points", t_points},
            {"lambda_min", lambda_min}, {"lambda_max", lambda_max}, {"lambda_points", lambda_points},
            {"spacing", spacing}};
}

nlohmann::json ROAnalysis::to_json() const {
    return {{"sigma0", sigma0}, {"sigma1", sigma1}, {"c_estimate", c_estimate},
            {"grid", grid.to_json()}, {"pass", pass}, {"details", details}};
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
    if (!(lo > 0) || !(hi >= lo)) throw ParameterError("log_grid: need 0 < lo <= hi");
    if (per_decade < 1) throw ParameterError("log_grid: need at least one point per decade");
    const double decades = std::log10(hi / lo);
    const int intervals = std::max(1, static_cast<int>(std::ceil(decades * per_decade - 1e-9)));
    std::vector<double> g(intervals + 1);
    for (int i = 0; i <= intervals; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / intervals);
    g.front() = lo;
    g.back() = hi;
    return g;
}

ROAnalysis verify_ro(const ROFunction& phi, double a, double t_max, int grid_density) {
    if (!(a > 1.0)) throw ParameterError("verify_ro: need a > 1");
    if (!(t_max >= a)) throw ParameterError("verify_ro: need t_max >= a");
    if (grid_density < 1) throw ParameterError("verify_ro: grid density must be >= 1");

    const auto ts = log_grid(1.0, t_max, grid_density);
    std::vector<double> lambdas(grid_density + 1);
    for (int i = 0; i <= grid_density; ++i) lambdas[i] = std::pow(a, static_cast<double>(i) / grid_density);
    lambdas.back() = a;

    ROAnalysis out;
    out.grid = {1.0, t_max, static_cast<int>(ts.size()), 1.0, a, static_cast<int>(lambdas.size()), "log"};
    double c = 1.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double t : ts) {
        const double base = phi(t);
        for (double lam : lambdas) {
            const double ratio = phi(lam * t) / base;
            c = std::max({c, ratio, 1.0 / ratio});
            if (lam > 1.0) {
                const double e = std::log(ratio) / std::log(lam);
                lo = std::min(lo, e);
                hi = std::max(hi, e);
            }
        }
    }
    out.c_estimate = c;
    out.sigma0 = lo;
    out.sigma1 = hi;
    out.pass = std::isfinite(c);
    out.details = {{"a", a}, {"exponent_range", "local secant exponents over lambda in (1, a]"}};
    return out;
}

ROAnalysis estimate_matuszewska(const ROFunction& phi, double lambda_max, double t_max) {
    if (!(lambda_max >= 10.0)) throw ParameterError("estimate_matuszewska: need lambda_max >= 10");
    if (!(t_max > 1.0)) throw ParameterError("estimate_matuszewska: need t_max > 1");
    constexpr int kPerDecade = 16;
    const auto ts = log_grid(1.0, t_max, kPerDecade);
    const double log_lambda = std::log(lambda_max);

    std::vector<double> secant(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) secant[i] = std::log(phi(lambda_max * ts[i]) / phi(ts[i])) / log_lambda;
    const auto [raw_lo, raw_hi] = std::minmax_element(secant.begin(), secant.end());

    // Tail window and least-squares fit S = a + b x with x = 1/log(t sqrt(L)).
    const double window_start = std::max(1.0, t_max / 100.0);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] >= window_start * (1.0 - 1e-12)) {
            xs.push_back(1.0 / std::log(ts[i] * std::sqrt(lambda_max)));
            ys.push_back(secant[i]);
        }
    }
    double slope = 0.0;
    if (xs.size() >= 3) {
        const double mx = mean(xs);
        const double my = mean(ys);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        slope = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    double corr_lo = std::numeric_limits<double>::infinity();
    double corr_hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double c = ys[i] - slope * xs[i];
        corr_lo = std::min(corr_lo, c);
        corr_hi = std::max(corr_hi, c);
    }
    const bool trend_explains = xs.size() >= 3 && corr_hi - corr_lo <= kTrendSpread;

    ROAnalysis out;
    out.grid = {1.0, t_max, static_cast<int>(ts.size()), lambda_max, lambda_max, 1, "log"};
    out.sigma0 = trend_explains ? corr_lo : *raw_lo;
    out.sigma1 = trend_explains ? corr_hi : *raw_hi;

    double c = 1.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double log_ratio = secant[i] * log_lambda;
        c = std::max({c, std::exp(log_ratio - out.sigma1 * log_lambda), std::exp(out.sigma0 * log_lambda - log_ratio)});
    }
    out.c_estimate = c;
    out.pass = std::isfinite(out.sigma0) && std::isfinite(out.sigma1) && std::isfinite(c);
    out.details = {{"method", trend_explains ? "tail_trend_corrected" : "raw_secant"},
                   {"raw_sigma0", *raw_lo},
                   {"raw_sigma1", *raw_hi},
                   {"tail_window", {window_start, t_max}},
                   {"tail_points", xs.size()},
                   {"trend_slope", slope},
                   {"corrected_spread", xs.empty() ? 0.0 : corr_hi - corr_lo},
                   {"spread_tolerance", kTrendSpread}};
    return out;
}

InterpParameter make_interp_parameter(const ROFunction& phi, double s0, double s1, const ROAnalysis* analysis) {
    require_exponents(s0, s1, "make_interp_parameter");
    if (analysis) {
        if (!(s0 < analysis->sigma0) || !(s1 > analysis->sigma1)) {
            throw ParameterError("make_interp_parameter: (s0, s1) = (" + format_double(s0) + ", " +
                                 format_double(s1) + ") does not straddle the estimated indices (" +
                                 format_double(analysis->sigma0) + ", " + format_double(analysis->sigma1) + ")");
        }
    }
    return InterpParameter(PositiveFunction::interp_parameter(phi.expr(), s0, s1),
                           ParameterProvenance::constructed_from_phi, std::make_pair(s0, s1));
}

ROFunction reconstruct_phi(const InterpParameter& psi, double s0, double s1) {
    require_exponents(s0, s1, "reconstruct_phi");
    return ROFunction(PositiveFunction::reconstruct(psi.expr(), s0, s1));
}

bool ratio_bounded_near_infinity(const ROFunction& phi0, const ROFunction& phi1) {
    const auto ts = log_grid(1.0, 1e8, 8);
    double head = 0.0, tail = 0.0;
    for (double t : ts) {
        const double r = phi0(t) / phi1(t);
        double& bucket = t < 1e7 ? head : tail;
        bucket = std::max(bucket, r);
    }
    return tail <= 2.0 * head;
}

ROFunction quadratic_compose(const ROFunction& phi0, const ROFunction& phi1, const InterpParameter& psi,
                             std::vector<std::string>* warnings) {
    if (warnings && !ratio_bounded_near_infinity(phi0, phi1)) {
        warnings->push_back("quadratic_compose: phi0/phi1 appears unbounded near infinity");
    }
    ROFunction out(PositiveFunction::compose_quadratic(phi0.expr(), phi1.expr(), psi.expr()));
    // Surface non-positive intermediates early.
    for (double t : log_grid(1.0, 1e6, 2)) (void)out(t);
    return out;
}

nlohmann::json PseudoconcavityReport::to_json() const {
    return {{"pass", pass}, {"hull_ratio", hull_ratio}, {"hull_ratio_doubled", hull_ratio_doubled},
            {"threshold", threshold}, {"samples", samples}};
}

namespace {

/// sup over samples of (least concave majorant)/psi on [lo, hi].
double hull_ratio(const InterpParameter& psi, double lo, double hi, int samples) {
    std::vector<double> ts(samples);
    for (int i = 0; i < samples; ++i) ts[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (samples - 1));
    ts.back() = hi;
    std::vector<double> ys(samples);
    for (int i = 0; i < samples; ++i) ys[i] = psi(ts[i]);

    // Upper hull (monotone chain), points sorted by t.
    std::vector<int> hull;
    for (int i = 0; i < samples; ++i) {
        while (hull.size() >= 2) {
            const int a = hull[hull.size() - 2];
            const int b = hull.back();
            const double cross = (ts[b] - ts[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (ts[i] - ts[a]);
            if (cross >= 0.0) hull.pop_back();
            else break;
        }
        hull.push_back(i);
    }
    double worst = 0.0;
    std::size_t seg = 0;
    for (int i = 0; i < samples; ++i) {
        while (seg + 1 < hull.size() && ts[hull[seg + 1]] < ts[i]) ++seg;
        double envelope;
        if (seg + 1 >= hull.size()) {
            envelope = ys[hull.back()];
        } else {
            const int a = hull[seg];
            const int b = hull[seg + 1];
            const double w = (ts[i] - ts[a]) / (ts[b] - ts[a]);
            envelope = ys[a] + w * (ys[b] - ys[a]);
        }
        worst = std::max(worst, std::max(envelope, ys[i]) / ys[i]);
    }
    return worst;
}

}  // namespace

PseudoconcavityReport check_pseudoconcave(const InterpParameter& psi, double c_onset, double t_max, int samples,
                                          double threshold) {
    if (!(c_onset > 1.0)) throw ParameterError("check_pseudoconcave: need c_onset > 1");
    if (samples < 3) throw ParameterError("check_pseudoconcave: need at least 3 sample points");
    if (!(t_max > c_onset)) throw ParameterError("check_pseudoconcave: need t_max > c_onset");
    PseudoconcavityReport r;
    r.threshold = threshold;
    r.samples = samples;
    r.hull_ratio = hull_ratio(psi, c_onset, t_max, samples);
    r.hull_ratio_doubled = hull_ratio(psi, c_onset, 2.0 * t_max, samples);
    r.pass = r.hull_ratio <= threshold && r.hull_ratio_doubled <= threshold &&
             r.hull_ratio_doubled <= 1.05 * r.hull_ratio;
    return r;
}

nlohmann::json ClassBReport::to_json() const {
    return {{"pass", pass}, {"min_value", min_value}, {"max_value", max_value}};
}

ClassBReport check_class_b(const InterpParameter& psi, double lo, double hi) {
    ClassBReport r;
    r.min_value = std::numeric_limits<double>::infinity();
    r.max_value = 0.0;
    for (double t : log_grid(lo, hi, 8)) {
        const double v = psi(t);
        r.min_value = std::min(r.min_value, v);
        r.max_value = std::max(r.max_value, v);
    }
    r.pass = r.min_value > 0.0 && std::isfinite(r.max_value);
    return r;
}

}  // namespace sobscale
