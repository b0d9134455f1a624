#include "sobscale/pdo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <type_traits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "sobscale/error.hpp"
#include "sobscale/random.hpp"

namespace sobscale {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

long long dot(std::span<const int> q, std::span<const int> m) {
    long long s = 0;
    for (std::size_t j = 0; j < q.size(); ++j) s += static_cast<long long>(q[j]) * m[j];
    return s;
}

int multi_order(const MultiIndex& a) {
    int s = 0;
    for (int v : a) s += v;
    return s;
}

/// Applies `kernel` (out_len x shape[axis], row-major) along `axis` of a
/// row-major tensor and updates `shape`.
std::vector<Complex> transform_axis(const std::vector<Complex>& in, std::vector<int>& shape, int axis,
                                    const std::vector<Complex>& kernel, int out_len) {
    std::size_t outer = 1, inner = 1;
    for (int j = 0; j < axis; ++j) outer *= static_cast<std::size_t>(shape[j]);
    for (std::size_t j = static_cast<std::size_t>(axis) + 1; j < shape.size(); ++j) inner *= static_cast<std::size_t>(shape[j]);
    const auto len = static_cast<std::size_t>(shape[axis]);
    const auto olen = static_cast<std::size_t>(out_len);
    std::vector<Complex> out(outer * olen * inner);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t r = 0; r < olen; ++r) {
            const Complex* krow = kernel.data() + r * len;
            Complex* dst = out.data() + (o * olen + r) * inner;
            for (std::size_t c = 0; c < len; ++c) {
                const Complex kv = krow[c];
                const Complex* src = in.data() + (o * len + c) * inner;
                for (std::size_t i = 0; i < inner; ++i) dst[i] += kv * src[i];
            }
        }
    }
    shape[axis] = out_len;
    return out;
}

/// u^ on the grid by per-axis sums.
std::vector<Complex> forward_transform(const LatticeFunction& u, const TorusGrid& grid) {
    const int n = u.box().dimension();
    const int radius = u.box().radius();
    const int side = 2 * radius + 1;
    const int points = grid.points_per_axis();
    std::vector<Complex> kernel(static_cast<std::size_t>(points) * side);
    for (int m = 0; m < points; ++m) {
        for (int c = 0; c < side; ++c) kernel[static_cast<std::size_t>(m) * side + c] = grid.root(-static_cast<long long>(c - radius) * m);
    }
    std::vector<Complex> data(u.values().begin(), u.values().end());
    std::vector<int> shape(static_cast<std::size_t>(n), side);
    for (int axis = 0; axis < n; ++axis) data = transform_axis(data, shape, axis, kernel, points);
    return data;
}

/// M^{-n} sum_x e^{2 pi i k.x} w(x) for |k_j| <= radius.
std::vector<Complex> inverse_transform(const std::vector<Complex>& w, const TorusGrid& grid, int radius) {
    const int n = grid.dimension();
    const int side = 2 * radius + 1;
    const int points = grid.points_per_axis();
    std::vector<Complex> kernel(static_cast<std::size_t>(side) * points);
    const double scale = 1.0 / points;
    for (int r = 0; r < side; ++r) {
        for (int m = 0; m < points; ++m) {
            kernel[static_cast<std::size_t>(r) * points + m] = grid.root(static_cast<long long>(r - radius) * m) * scale;
        }
    }
    std::vector<Complex> data = w;
    std::vector<int> shape(static_cast<std::size_t>(n), points);
    for (int axis = 0; axis < n; ++axis) data = transform_axis(data, shape, axis, kernel, side);
    return data;
}

/// q_j, with dimension-free constant modes reading as q = 0.
int mode_component(const SymbolMode& mode, std::size_t j) { return j < mode.q.size() ? mode.q[j] : 0; }

/// Trigonometric polynomial sum_q c_q ff(q, beta) e^{2 pi i q.x} on the grid nodes.
std::vector<Complex> sample_modes(const std::vector<SymbolMode>& modes, const TorusGrid& grid, const MultiIndex* beta) {
    std::vector<Complex> out(grid.size());
    std::vector<std::pair<const SymbolMode*, Complex>> scaled;
    for (const auto& mode : modes) {
        Complex c = mode.coeff;
        if (beta) {
            for (std::size_t j = 0; j < beta->size(); ++j) c *= falling_factorial(mode_component(mode, j), (*beta)[j]);
        }
        if (c != Complex(0.0)) scaled.emplace_back(&mode, c);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto node = grid.node(i);
        Complex s = 0.0;
        for (const auto& [mode, c] : scaled) s += c * grid.root(dot(mode->q, node));
        out[i] = s;
    }
    return out;
}

void require_dimension(const Symbol& a, int n, const char* what) {
    if (a.dimension() != 0 && a.dimension() != n) {
        throw DimensionError(std::string(what) + ": symbol has torus dimension " + std::to_string(a.dimension()) +
                             ", box has " + std::to_string(n));
    }
}

int mode_radius_or_zero(const Symbol& a, const char* what) {
    if (!a.mode_radius()) throw CapabilityError(std::string(what) + ": symbol declares no mode radius");
    return *a.mode_radius();
}

TorusGrid working_grid(const Symbol& a, const LatticeBox& box) {
    int points = std::max(TorusGrid::default_points(box.radius()),
                          required_points(box.radius(), mode_radius_or_zero(a, "working_grid")));
    if (points % 2 == 0) ++points;
    return TorusGrid(box.dimension(), points);
}

double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

/// Delta^alpha_k F at k = sum over gamma <= alpha of
/// (-1)^{|alpha - gamma|} binom(alpha, gamma) F(k + gamma).
template <typename F>
auto lattice_difference(F&& f, std::span<const int> k, const MultiIndex& alpha) {
    const std::size_t n = alpha.size();
    std::vector<int> gamma(n, 0);
    std::vector<int> point(k.begin(), k.end());
    decltype(f(std::span<const int>(point))) total{};
    while (true) {
        double coeff = 1.0;
        int parity = 0;
        for (std::size_t j = 0; j < n; ++j) {
            coeff *= binomial(alpha[j], gamma[j]);
            parity += alpha[j] - gamma[j];
            point[j] = k[j] + gamma[j];
        }
        const double sign = parity % 2 ? -coeff : coeff;
        if constexpr (std::is_arithmetic_v<decltype(total)>) {
            total += sign * f(std::span<const int>(point));
        } else {
            const auto values = f(std::span<const int>(point));
            if (total.empty()) total.assign(values.size(), Complex(0.0));
            for (std::size_t i = 0; i < values.size(); ++i) total[i] += sign * values[i];
        }
        std::size_t j = 0;
        while (j < n && ++gamma[j] > alpha[j]) gamma[j++] = 0;
        if (j == n) return total;
    }
}

double max_abs(const std::vector<Complex>& v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

double min_abs(const std::vector<Complex>& v) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& z : v) m = std::min(m, std::abs(z));
    return m;
}

}  // namespace

SymbolTerm SymbolTerm::make(nlohmann::json k_factor, std::vector<SymbolMode> modes) {
    PositiveFunction f = PositiveFunction::constant(1.0);
    if (k_factor.is_null()) {
        k_factor = {{"family", "constant"}, {"c", 1.0}};
    } else if (k_factor.value("family", "") == "bracket_power") {
        f = PositiveFunction::power(k_factor.at("s").get<double>());
    } else {
        f = PositiveFunction::from_json(k_factor);
    }
    if (modes.empty()) modes.push_back({{}, Complex(1.0)});
    return {std::move(k_factor), std::move(f), std::move(modes)};
}

Symbol::Symbol(double order, std::vector<SymbolTerm> terms) : order_(order), terms_(std::move(terms)) {
    if (!std::isfinite(order_)) throw ParameterError("Symbol: order must be finite");
    if (terms_.empty()) throw ParameterError("Symbol: needs at least one term");
    int radius = 0;
    for (const auto& t : terms_) {
        for (const auto& mode : t.modes) {
            if (mode.q.empty()) continue;
            if (dimension_ == 0) dimension_ = static_cast<int>(mode.q.size());
            if (static_cast<int>(mode.q.size()) != dimension_) throw DimensionError("Symbol: modes of mixed dimension");
            for (int q : mode.q) radius = std::max(radius, std::abs(q));
        }
    }
    // Constant modes written as empty q take the symbol's dimension.
    for (auto& t : terms_) {
        for (auto& mode : t.modes) {
            if (mode.q.empty()) mode.q.assign(static_cast<std::size_t>(dimension_), 0);
        }
    }
    mode_radius_ = radius;
}

Symbol Symbol::custom(int dimension, double order, Evaluator evaluator, std::optional<int> mode_radius) {
    if (dimension < 1) throw DimensionError("Symbol::custom: dimension must be positive");
    if (!evaluator) throw ParameterError("Symbol::custom: empty evaluator");
    Symbol s(order, {SymbolTerm::make(nullptr, {})});
    s.terms_.clear();
    s.dimension_ = dimension;
    s.mode_radius_ = mode_radius;
    s.evaluator_ = std::move(evaluator);
    return s;
}

Symbol Symbol::bracket_power(double s) {
    return Symbol(s, {SymbolTerm::make({{"family", "bracket_power"}, {"s", s}}, {})});
}

Symbol Symbol::from_json(const nlohmann::json& j) {
    try {
        const double m = j.at("m").get<double>();
        std::vector<SymbolTerm> terms;
        for (const auto& t : j.at("terms")) {
            std::vector<SymbolMode> modes;
            if (t.contains("x_modes")) {
                for (const auto& mj : t.at("x_modes")) {
                    const auto c = mj.at("coeff");
                    Complex coeff = c.is_array() ? Complex(c.at(0).get<double>(), c.at(1).get<double>())
                                                 : Complex(c.get<double>(), 0.0);
                    modes.push_back({mj.at("q").get<std::vector<int>>(), coeff});
                }
            }
            terms.push_back(SymbolTerm::make(t.contains("k_factor") ? t.at("k_factor") : nlohmann::json(), std::move(modes)));
        }
        return Symbol(m, std::move(terms));
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("symbol JSON: ") + e.what());
    }
}

nlohmann::json Symbol::to_json() const {
    if (is_custom()) {
        nlohmann::json j = {{"m", order_}, {"custom", true}, {"n", dimension_}};
        if (mode_radius_) j["mode_radius"] = *mode_radius_;
        return j;
    }
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : terms_) {
        nlohmann::json modes = nlohmann::json::array();
        for (const auto& mode : t.modes) {
            modes.push_back({{"q", mode.q}, {"coeff", {mode.coeff.real(), mode.coeff.imag()}}});
        }
        terms.push_back({{"k_factor", t.k_factor_json}, {"x_modes", std::move(modes)}});
    }
    return {{"m", order_}, {"terms", std::move(terms)}};
}

bool Symbol::is_multiplier() const { return mode_radius_ && *mode_radius_ == 0; }

Complex Symbol::operator()(std::span<const int> k, std::span<const double> x) const {
    if (is_custom()) return evaluator_(k, x);
    const double bracket = japanese_bracket(k);
    Complex total = 0.0;
    for (const auto& t : terms_) {
        Complex g = 0.0;
        for (const auto& mode : t.modes) {
            double phase = 0.0;
            for (std::size_t j = 0; j < mode.q.size(); ++j) phase += mode.q[j] * x[j];
            g += mode.coeff * std::polar(1.0, kTwoPi * phase);
        }
        total += t.k_factor(bracket) * g;
    }
    return total;
}

Complex Symbol::derivative(std::span<const int> k, std::span<const double> x, const MultiIndex& beta) const {
    if (is_custom()) throw CapabilityError("Symbol::derivative: evaluator symbols have no closed-form derivative");
    const double bracket = japanese_bracket(k);
    Complex total = 0.0;
    for (const auto& t : terms_) {
        Complex g = 0.0;
        for (const auto& mode : t.modes) {
            double phase = 0.0;
            double ff = 1.0;
            for (std::size_t j = 0; j < mode.q.size(); ++j) phase += mode.q[j] * x[j];
            for (std::size_t j = 0; j < beta.size(); ++j) ff *= falling_factorial(mode_component(mode, j), beta[j]);
            g += ff * mode.coeff * std::polar(1.0, kTwoPi * phase);
        }
        total += t.k_factor(bracket) * g;
    }
    return total;
}

std::vector<Complex> Symbol::sample(std::span<const int> k, const TorusGrid& grid) const {
    std::vector<Complex> out(grid.size(), 0.0);
    if (is_custom()) {
        for (std::size_t i = 0; i < grid.size(); ++i) out[i] = evaluator_(k, grid.coordinates(i));
        return out;
    }
    const double bracket = japanese_bracket(k);
    for (const auto& t : terms_) {
        const double f = t.k_factor(bracket);
        const auto g = sample_modes(t.modes, grid, nullptr);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += f * g[i];
    }
    return out;
}

int required_points(int radius, int mode_radius) { return 2 * radius + 2 * mode_radius + 1; }

LatticeFunction pdo_apply(const Symbol& a, const LatticeFunction& u, const TorusGrid& grid,
                          PdoDiagnostics* diagnostics) {
    const LatticeBox& box = u.box();
    const int n = box.dimension();
    require_dimension(a, n, "pdo_apply");
    if (grid.dimension() != n) throw DimensionError("pdo_apply: grid and box dimensions differ");
    const int r = mode_radius_or_zero(a, "pdo_apply");
    const int needed = required_points(box.radius(), r);
    if (grid.points_per_axis() < needed) {
        throw ResolutionError("pdo_apply: M = " + std::to_string(grid.points_per_axis()) + " is below the quadrature limit; need M >= 2N+2r+1 = " +
                              std::to_string(needed) + " (N = " + std::to_string(box.radius()) + ", r = " + std::to_string(r) + ")");
    }
    const LatticeBox big(n, box.radius() + r);
    const auto uhat = forward_transform(u, grid);

    std::vector<Complex> enlarged(big.size(), 0.0);
    if (a.is_custom()) {
        std::vector<Complex> terms(grid.size());
        for (std::size_t i = 0; i < big.size(); ++i) {
            const Point k = big.point(i);
            for (std::size_t m = 0; m < grid.size(); ++m) {
                terms[m] = grid.root(dot(k, grid.node(m))) * a(k, grid.coordinates(m)) * uhat[m];
            }
            enlarged[i] = pairwise_sum(terms) * grid.weight();
        }
    } else {
        std::vector<double> brackets(big.size());
        for (std::size_t i = 0; i < big.size(); ++i) brackets[i] = japanese_bracket(big.point(i));
        std::vector<Complex> w(grid.size());
        for (const auto& t : a.terms()) {
            const auto g = sample_modes(t.modes, grid, nullptr);
            for (std::size_t m = 0; m < w.size(); ++m) w[m] = g[m] * uhat[m];
            const auto v = inverse_transform(w, grid, big.radius());
            for (std::size_t i = 0; i < big.size(); ++i) enlarged[i] += t.k_factor(brackets[i]) * v[i];
        }
    }

    LatticeFunction out(box);
    std::vector<double> outside;
    std::vector<double> all;
    for (std::size_t i = 0; i < big.size(); ++i) {
        const Point k = big.point(i);
        all.push_back(std::norm(enlarged[i]));
        if (auto j = box.find(k)) {
            out[*j] = enlarged[i];
        } else {
            outside.push_back(std::norm(enlarged[i]));
        }
    }
    if (diagnostics) {
        diagnostics->leakage = std::sqrt(pairwise_sum(outside));
        const double total = std::sqrt(pairwise_sum(all));
        if (diagnostics->leakage > kLeakageWarnThreshold * total) {
            diagnostics->warnings.push_back("pdo_apply: truncation leaked l2 mass " + std::to_string(diagnostics->leakage) +
                                            " outside the box");
        }
    }
    return out;
}

PdoMatrix pdo_matrix(const Symbol& a, const LatticeBox& box, const TorusGrid& grid) {
    const auto size = static_cast<Eigen::Index>(box.size());
    PdoMatrix out{box, grid, Matrix::Zero(size, size), a.to_json(), 0.0};
    std::vector<double> leakage(box.size(), 0.0);
    parallel_for(box.size(), [&](std::size_t j) {
        PdoDiagnostics diag;
        const auto column = pdo_apply(a, LatticeFunction::delta(box, box.point(j)), grid, &diag);
        for (std::size_t i = 0; i < box.size(); ++i) out.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = column[i];
        leakage[j] = diag.leakage;
    });
    out.max_leakage = *std::max_element(leakage.begin(), leakage.end());

    if (a.is_multiplier()) {
        const std::vector<double> x(static_cast<std::size_t>(box.dimension()), 0.0);
        double scale = 0.0;
        for (Eigen::Index i = 0; i < size; ++i) scale = std::max(scale, std::abs(out.entries(i, i)));
        for (Eigen::Index j = 0; j < size; ++j) {
            const Complex expected = a(box.point(static_cast<std::size_t>(j)), x);
            for (Eigen::Index i = 0; i < size; ++i) {
                const Complex target = i == j ? expected : Complex(0.0);
                if (std::abs(out.entries(i, j) - target) > 1e-12 * std::max(scale, 1.0)) {
                    throw NumericError("pdo_matrix: multiplier symbol did not produce diag(a(k)) at (" +
                                       std::to_string(i) + ", " + std::to_string(j) + ")");
                }
            }
        }
    }
    return out;
}

PdoMatrix formal_adjoint(const PdoMatrix& t) {
    return {t.box, t.grid, t.entries.adjoint(), {{"adjoint_of", t.symbol_ref}}, t.max_leakage};
}

nlohmann::json Ellipticity::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < table.size(); ++i) {
        rows.push_back({{"R", table[i].first}, {"C", table[i].second}, {"C_refined", refined[i]}});
    }
    return {{"C", c}, {"R", r}, {"pass", pass}, {"table", std::move(rows)}};
}

nlohmann::json SymbolEstimates::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : entries) {
        rows.push_back({{"alpha", e.alpha}, {"beta", e.beta}, {"C", e.c},
                        {"slope", e.slope ? nlohmann::json(*e.slope) : nlohmann::json()}});
    }
    nlohmann::json j = {{"m", order}, {"estimates", std::move(rows)}, {"consistent", consistent}};
    if (ellipticity) j["ellipticity"] = ellipticity->to_json();
    if (!warnings.empty()) j["warnings"] = warnings;
    return j;
}

SymbolEstimates symbol_class_estimate(const Symbol& a, const LatticeBox& box, const TorusGrid& grid, int max_alpha,
                                      int max_beta) {
    const int n = box.dimension();
    require_dimension(a, n, "symbol_class_estimate");
    if (grid.dimension() != n) throw DimensionError("symbol_class_estimate: grid and box dimensions differ");
    if (max_alpha < 0 || max_beta < 0) throw ParameterError("symbol_class_estimate: orders must be non-negative");
    if (a.is_custom() && max_beta > 0) {
        if (!a.mode_radius()) {
            throw CapabilityError("symbol_class_estimate: x-derivatives need a closed form or a declared mode radius");
        }
        if (*a.mode_radius() > grid.max_frequency() || -*a.mode_radius() < grid.min_frequency()) {
            throw CapabilityError("symbol_class_estimate: declared mode radius exceeds the grid's frequency range");
        }
    }

    SymbolEstimates out;
    out.order = a.order();
    const auto alphas = multi_indices_up_to(n, max_alpha);
    const auto betas = multi_indices_up_to(n, max_beta);

    // Per-term x-parts D^(beta) g_t on the grid.
    std::vector<std::vector<std::vector<Complex>>> dg(betas.size());
    if (!a.is_custom()) {
        for (std::size_t b = 0; b < betas.size(); ++b) {
            for (const auto& t : a.terms()) dg[b].push_back(sample_modes(t.modes, grid, &betas[b]));
        }
    }

    auto sup_x = [&](const MultiIndex& alpha, std::size_t b, std::span<const int> k) {
        if (a.is_custom()) {
            auto samples = lattice_difference([&](std::span<const int> p) { return a.sample(p, grid); }, k, alpha);
            if (multi_order(betas[b]) == 0) return max_abs(samples);
            TorusSamples s(grid, std::move(samples));
            const auto d = falling_factorial_derivative(s, betas[b]);
            return max_abs(std::vector<Complex>(d.values().begin(), d.values().end()));
        }
        std::vector<Complex> acc(grid.size(), 0.0);
        for (std::size_t ti = 0; ti < a.terms().size(); ++ti) {
            const auto& f = a.terms()[ti].k_factor;
            const double df = lattice_difference([&](std::span<const int> p) { return f(japanese_bracket(p)); }, k, alpha);
            if (df == 0.0) continue;
            for (std::size_t m = 0; m < acc.size(); ++m) acc[m] += df * dg[b][ti][m];
        }
        return max_abs(acc);
    };

    double scale = 0.0;
    const int radius = box.radius();
    for (const auto& alpha : alphas) {
        for (std::size_t b = 0; b < betas.size(); ++b) {
            SymbolEstimate e{alpha, betas[b], 0.0, std::nullopt};
            const double exponent = a.order() - multi_order(alpha);
            double g1 = 0.0, g2 = 0.0, r1 = 0.0, r2 = 0.0;
            for (std::size_t i = 0; i < box.size(); ++i) {
                const Point k = box.point(i);
                const double g = sup_x(alpha, b, k);
                const double rho = euclidean_norm(k);
                e.c = std::max(e.c, g / std::pow(1.0 + rho, exponent));
                if (multi_order(alpha) == 0 && multi_order(betas[b]) == 0) scale = std::max(scale, g);
                if (rho > radius / 4.0 && rho <= radius / 2.0 && g > g1) g1 = g, r1 = rho;
                if (rho > radius / 2.0 && rho <= radius && g > g2) g2 = g, r2 = rho;
            }
            const double vanish = 1e-13 * std::max(scale, std::numeric_limits<double>::min());
            if (radius >= 4 && g1 > vanish && g2 > vanish) {
                e.slope = std::log(g2 / g1) / std::log((1.0 + r2) / (1.0 + r1));
            }
            out.entries.push_back(std::move(e));
        }
    }
    if (radius < 4) out.warnings.push_back("symbol_class_estimate: box radius below 4, no dyadic shells for slopes");

    out.consistent = true;
    for (const auto& e : out.entries) {
        if (e.slope && *e.slope > a.order() - multi_order(e.alpha) + kSlopeMargin) out.consistent = false;
    }
    out.ellipticity = ellipticity_estimate(a, box, grid);
    return out;
}

Ellipticity ellipticity_estimate(const Symbol& a, const LatticeBox& box, const TorusGrid& grid) {
    const int n = box.dimension();
    require_dimension(a, n, "ellipticity_estimate");
    if (grid.dimension() != n) throw DimensionError("ellipticity_estimate: grid and box dimensions differ");
    const int factor = n == 1 ? 8 : (n == 2 ? 3 : 2);
    int refined_points = factor * grid.points_per_axis();
    if (refined_points % 2 == 0) ++refined_points;
    const TorusGrid fine(n, refined_points);

    std::vector<double> rho(box.size()), coarse(box.size()), refined(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Point k = box.point(i);
        rho[i] = euclidean_norm(k);
        const double scale = std::pow(1.0 + rho[i], a.order());
        coarse[i] = min_abs(a.sample(k, grid)) / scale;
        refined[i] = min_abs(a.sample(k, fine)) / scale;
    }

    Ellipticity out;
    std::vector<double> radii{0.0};
    for (int r = 1; r < box.radius(); r *= 2) radii.push_back(r);
    out.pass = true;
    for (double radius : radii) {
        double c = std::numeric_limits<double>::infinity(), cr = c;
        for (std::size_t i = 0; i < box.size(); ++i) {
            if (rho[i] > radius) {
                c = std::min(c, coarse[i]);
                cr = std::min(cr, refined[i]);
            }
        }
        if (!std::isfinite(c)) continue;
        if (!out.table.empty() && cr < out.refined.back()) out.pass = false;
        out.table.emplace_back(radius, c);
        out.refined.push_back(cr);
        if (!(cr > kEllipticFloor) || cr < 0.5 * c) out.pass = false;
        if (cr > out.c) out.c = cr, out.r = radius;
    }
    if (out.table.empty()) out.pass = false;
    return out;
}

std::vector<std::pair<int, double>> mapping_norm_scan(const Symbol& a, const ROFunction& phi, int dimension,
                                                      const std::vector<int>& radii) {
    std::vector<std::pair<int, double>> out;
    for (int radius : radii) {
        const LatticeBox box(dimension, radius);
        const auto t = pdo_matrix(a, box, working_grid(a, box));
        std::vector<double> w_in(box.size()), w_out(box.size());
        for (std::size_t i = 0; i < box.size(); ++i) {
            const double b = japanese_bracket(box.point(i));
            w_in[i] = phi(b);
            w_out[i] = std::pow(b, -a.order()) * w_in[i];
        }
        out.emplace_back(radius, spectral_norm(weight_conjugate(t.entries, w_out, w_in)));
    }
    return out;
}

nlohmann::json FredholmReport::to_json() const {
    std::vector<double> small(smallest_singulars.data(), smallest_singulars.data() + smallest_singulars.size());
    nlohmann::json j = {{"s", s},
                        {"s_alt", s_alt},
                        {"dim_ker", dim_ker},
                        {"dim_coker", dim_coker},
                        {"index", index},
                        {"smallest_singulars", small},
                        {"rank_defect", rank_defect},
                        {"rank_defect_alt", rank_defect_alt},
                        {"parametrix_residual", parametrix_residual},
                        {"decomposition_residual", decomposition_residual},
                        {"decomposition_overlap", decomposition_overlap}};
    if (!warnings.empty()) j["warnings"] = warnings;
    return j;
}

namespace {

Matrix sobolev_conjugate(const Matrix& t, const LatticeBox& box, double s, double m) {
    std::vector<double> w_in(box.size()), w_out(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        const double b = japanese_bracket(box.point(i));
        w_in[i] = std::pow(b, s);
        w_out[i] = std::pow(b, s - m);
    }
    return weight_conjugate(t, w_out, w_in);
}

int numerical_rank(const Eigen::VectorXd& sv, double tol) {
    if (sv.size() == 0) return 0;
    const double cut = tol * sv(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) >= cut && sv(i) > 0.0;
    return r;
}

}  // namespace

FredholmReport fredholm_surrogate(const Symbol& a, double s, const LatticeBox& box, const TorusGrid& grid,
                                  const FredholmOptions& options) {
    FredholmReport out;
    out.s = s;
    out.s_alt = options.s_alt.value_or(s + 1.0);
    if (!ellipticity_estimate(a, box, grid).pass) {
        out.warnings.push_back("fredholm_surrogate: symbol is not elliptic on the sampled range");
    }
    Matrix t = pdo_matrix(a, box, grid).entries;
    if (options.symmetrize) t = ((t + t.adjoint()) * 0.5).eval();

    const Matrix w = sobolev_conjugate(t, box, s, a.order());
    Eigen::BDCSVD<Matrix> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) throw NumericError("fredholm_surrogate: SVD failed");
    const Eigen::VectorXd sv = svd.singularValues();
    const auto size = static_cast<int>(sv.size());
    const int rank = numerical_rank(sv, options.tol);
    out.dim_ker = size - rank;
    out.dim_coker = size - numerical_rank(singular_values(w.adjoint()), options.tol);
    out.index = out.dim_ker - out.dim_coker;
    out.rank_defect = out.dim_ker;
    out.rank_defect_alt = size - numerical_rank(singular_values(sobolev_conjugate(t, box, out.s_alt, a.order())), options.tol);
    const int keep = std::min(5, size);
    out.smallest_singulars = sv.tail(keep).reverse();

    // Pseudoinverse parametrix B and the residual B W - I.
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(size);
    for (int i = 0; i < rank; ++i) inv(i) = 1.0 / sv(i);
    const Matrix b = svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
    out.parametrix_residual = spectral_norm(b * w - Matrix::Identity(size, size));

    // v = P_ran v + P_ker(W^dagger) v.
    const Vector v = to_vector(random_lattice_function(box, CounterRng(options.seed)));
    const Matrix& u = svd.matrixU();
    const Vector p_ran = u.leftCols(rank) * (u.leftCols(rank).adjoint() * v);
    const Vector p_ker = u.rightCols(size - rank) * (u.rightCols(size - rank).adjoint() * v);
    out.decomposition_residual = (v - p_ran - p_ker).norm() / v.norm();
    out.decomposition_overlap = std::abs(p_ran.dot(p_ker)) / v.squaredNorm();
    return out;
}

AScale ascale_build(const Symbol& a, const LatticeBox& box, const TorusGrid& grid, const ROFunction& phi) {
    if (std::abs(a.order() - 1.0) > 1e-12) throw ParameterError("ascale_build: symbol must have order 1");
    AScale out{Matrix(), Eigen::VectorXd(), Matrix(), phi, box, 0.0, 0.0, {}};
    if (!ellipticity_estimate(a, box, grid).pass) {
        out.warnings.push_back("ascale_build: ellipticity of order 1 not confirmed on the sampled range");
    }
    const Matrix t = pdo_matrix(a, box, grid).entries;
    out.op = (t + t.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> first(out.op, Eigen::EigenvaluesOnly);
    if (first.info() != Eigen::Success) throw NumericError("ascale_build: eigensolver failed");
    out.shift = std::max(0.0, 1.0 - first.eigenvalues().minCoeff());
    if (out.shift > 0.0) {
        out.op += out.shift * Matrix::Identity(out.op.rows(), out.op.cols());
        if (out.shift > 1e-12) {
            std::ostringstream msg;
            msg << "ascale_build: applied shift " << out.shift << " to reach (Au, u) >= |u|^2";
            out.warnings.push_back(msg.str());
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(out.op);
    if (es.info() != Eigen::Success) throw NumericError("ascale_build: eigensolver failed");
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();

    const double norm = out.eigenvalues.cwiseAbs().maxCoeff();
    out.hermiticity_defect = (out.op - out.op.adjoint()).cwiseAbs().maxCoeff();
    if (out.hermiticity_defect > 1e-12 * norm) throw NumericError("ascale_build: operator is not Hermitian");
    if (out.eigenvalues.minCoeff() < 1.0 - 1e-10) throw NumericError("ascale_build: minimum eigenvalue below 1");
    return out;
}

double ascale_norm(const LatticeFunction& u, const AScale& scale) {
    if (!(u.box() == scale.box)) throw ShapeError("ascale_norm: function lives on a different box");
    const Vector c = scale.eigenvectors.adjoint() * to_vector(u);
    std::vector<double> terms(static_cast<std::size_t>(c.size()));
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double lambda = std::max(scale.eigenvalues(i), 1.0);
        terms[static_cast<std::size_t>(i)] = std::norm(scale.phi(lambda) * c(i));
    }
    return std::sqrt(pairwise_sum(terms));
}

ClaimReport verify_theorem7(const Symbol& a, const ROFunction& phi, int dimension, const std::vector<int>& radii,
                            int trials, std::uint64_t seed, double kappa) {
    if (!(kappa > 1.0)) throw ParameterError("verify_theorem7: kappa must exceed 1");
    if (trials < 1) throw ParameterError("verify_theorem7: need at least one trial");
    ClaimReport r;
    r.claim = "A-scale norm ||phi(A) u|| is equivalent to the H^phi norm uniformly in the truncation";
    r.parameters = {{"symbol", a.to_json()}, {"phi", phi.to_json()}, {"n", dimension}, {"radii", radii},
                    {"seed", seed}, {"kappa", kappa}};
    r.trials = trials;
    r.tolerance = kappa - 1.0;
    r.pass = true;

    nlohmann::json bands = nlohmann::json::array();
    double previous_width = std::numeric_limits<double>::infinity();
    for (int radius : radii) {
        const LatticeBox box(dimension, radius);
        const AScale scale = ascale_build(a, box, working_grid(a, box), phi);
        for (const auto& w : scale.warnings) r.warnings.push_back(w);
        std::vector<double> weights(box.size());
        for (std::size_t i = 0; i < box.size(); ++i) weights[i] = phi(japanese_bracket(box.point(i)));

        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int t = 0; t < trials; ++t) {
            const CounterRng rng(seed, (static_cast<std::uint64_t>(radius) << 32) | static_cast<std::uint64_t>(t));
            const auto u = random_lattice_function(box, rng);
            std::vector<double> terms(u.size());
            for (std::size_t i = 0; i < u.size(); ++i) terms[i] = std::norm(weights[i] * u[i]);
            const double ratio = ascale_norm(u, scale) / std::sqrt(pairwise_sum(terms));
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            r.max_rel_deviation = std::max(r.max_rel_deviation, std::abs(ratio - 1.0));
        }

        // Extreme ratios over all u: singular values of phi(L) U^H W^{-1}.
        Eigen::VectorXd phil(scale.eigenvalues.size());
        for (Eigen::Index i = 0; i < phil.size(); ++i) phil(i) = phi(std::max(scale.eigenvalues(i), 1.0));
        std::vector<double> ones(box.size(), 1.0);
        const Matrix m = weight_conjugate(phil.asDiagonal() * scale.eigenvectors.adjoint(), ones, weights);
        const Eigen::VectorXd sv = singular_values(m);

        const double width = hi - lo;
        if (lo < 1.0 / kappa || hi > kappa) r.pass = false;
        if (width > previous_width + 1e-9) r.pass = false;
        previous_width = width;
        bands.push_back({{"N", radius}, {"min", lo}, {"max", hi}, {"width", width}, {"shift", scale.shift},
                         {"exact_min", sv(sv.size() - 1)}, {"exact_max", sv(0)}});
    }
    r.extra = {{"bands", std::move(bands)}};
    return r;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    out << "row,col,re,im\n";
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << i << ',' << j << ',' << m(i, j).real() << ',' << m(i, j).imag() << '\n';
        }
    }
    out.precision(old);
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw ShapeError("read_matrix_binary: truncated input");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

constexpr char kMagic[8] = {'S', 'O', 'B', 'S', 'C', 'A', 'L', 'E'};

}  // namespace

void write_matrix_binary(std::ostream& out, const Matrix& m) {
    out.write(kMagic, 8);
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            put_u64(out, std::bit_cast<std::uint64_t>(m(i, j).real()));
            put_u64(out, std::bit_cast<std::uint64_t>(m(i, j).imag()));
        }
    }
}

Matrix read_matrix_binary(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || !std::equal(magic, magic + 8, kMagic)) throw ShapeError("read_matrix_binary: missing SOBSCALE header");
    const auto rows = static_cast<Eigen::Index>(get_u64(in));
    const auto cols = static_cast<Eigen::Index>(get_u64(in));
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double re = std::bit_cast<double>(get_u64(in));
            const double im = std::bit_cast<double>(get_u64(in));
            m(i, j) = Complex(re, im);
        }
    }
    return m;
}

}  // namespace sobscale
