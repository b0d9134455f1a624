#include "sobscale/spaces.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "sobscale/error.hpp"

namespace sobscale {

namespace {

void require_box(const LatticeFunction& u, const WeightFamily& w, const char* what) {
    if (!(u.box() == w.box())) throw ShapeError(std::string(what) + ": function and weights live on different boxes");
}

}  // namespace

WeightFamily::WeightFamily(LatticeBox box, std::vector<double> weights, nlohmann::json source,
                           std::optional<double> s)
    : box_(box), weights_(std::move(weights)), source_(std::move(source)), exponent_(s) {
    if (weights_.size() != box_.size()) throw ShapeError("WeightFamily: weight count does not match box");
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
            throw DomainError("WeightFamily: non-positive or non-finite weight at lattice index " + std::to_string(i));
        }
    }
}

WeightFamily WeightFamily::sobolev(const LatticeBox& box, double s) {
    std::vector<double> w(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) w[i] = std::pow(japanese_bracket(box.point(i)), s);
    return WeightFamily(box, std::move(w), {{"s", s}}, s);
}

WeightFamily WeightFamily::from_phi(const LatticeBox& box, const ROFunction& phi) {
    std::vector<double> w(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) w[i] = phi(japanese_bracket(box.point(i)));
    return WeightFamily(box, std::move(w), phi.to_json(), std::nullopt);
}

WeightFamily WeightFamily::from_weights(const LatticeBox& box, std::vector<double> weights, nlohmann::json label) {
    return WeightFamily(box, std::move(weights), std::move(label), std::nullopt);
}

double h_phi_norm(const LatticeFunction& u, const WeightFamily& w) {
    require_box(u, w, "h_phi_norm");
    std::vector<double> terms(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) terms[i] = std::norm(w[i] * u[i]);
    return std::sqrt(pairwise_sum(terms));
}

Complex h_phi_inner(const LatticeFunction& u, const LatticeFunction& v, const WeightFamily& w) {
    require_box(u, w, "h_phi_inner");
    require_box(v, w, "h_phi_inner");
    std::vector<Complex> terms(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) terms[i] = (w[i] * w[i]) * u[i] * std::conj(v[i]);
    return pairwise_sum(terms);
}

double sobolev_norm(const LatticeFunction& u, double s) {
    return h_phi_norm(u, WeightFamily::sobolev(u.box(), s));
}

PairingBound duality_pairing_bound(const LatticeFunction& u, const LatticeFunction& v, double s) {
    if (!(u.box() == v.box())) throw ShapeError("duality_pairing_bound: functions live on different boxes");
    return {l2_inner(u, v), sobolev_norm(u, s) * sobolev_norm(v, -s)};
}

DualitySup duality_sup(const LatticeFunction& u, double s) {
    const double norm = sobolev_norm(u, s);
    if (!(norm > 0.0)) throw DegenerateInputError("duality_sup: input is the zero function");
    LatticeFunction v(u.box());
    for (std::size_t i = 0; i < u.size(); ++i) {
        v[i] = std::pow(japanese_bracket(u.box().point(i)), 2.0 * s) * u[i] / norm;
    }
    return {norm, std::move(v)};
}

nlohmann::json LinfEmbedding::to_json() const {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& [n, c] : trend) t.push_back({{"N", n}, {"C", c}});
    return {{"constant", constant}, {"trend", std::move(t)}};
}

LinfEmbedding linf_embedding_constant(const WeightFamily& w) {
    const LatticeBox& box = w.box();
    auto constant_for = [&](int radius) {
        std::vector<double> terms;
        terms.reserve(box.size());
        for (std::size_t i = 0; i < box.size(); ++i) {
            const Point k = box.point(i);
            bool inside = true;
            for (int c : k) inside = inside && std::abs(c) <= radius;
            if (inside) terms.push_back(1.0 / (w[i] * w[i]));
        }
        return std::sqrt(pairwise_sum(terms));
    };
    LinfEmbedding out;
    for (int r = 1; r < box.radius(); r *= 2) out.trend.emplace_back(r, constant_for(r));
    out.constant = constant_for(box.radius());
    out.trend.emplace_back(box.radius(), out.constant);
    return out;
}

double embedding_ratio(const WeightFamily& w0, const WeightFamily& w1) {
    if (!(w0.box() == w1.box())) throw ShapeError("embedding_ratio: weights live on different boxes");
    double r = 0.0;
    for (std::size_t i = 0; i < w0.box().size(); ++i) r = std::max(r, w0[i] / w1[i]);
    return r;
}

void write_norm_breakdown_csv(std::ostream& out, const LatticeFunction& u, const WeightFamily& w) {
    require_box(u, w, "write_norm_breakdown_csv");
    const LatticeBox& box = u.box();
    for (int j = 0; j < box.dimension(); ++j) out << "k" << (j + 1) << ',';
    out << "weight,abs_u,contribution\n";
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < box.size(); ++i) {
        for (int c : box.point(i)) out << c << ',';
        const double a = std::abs(u[i]);
        out << w[i] << ',' << a << ',' << (w[i] * a) * (w[i] * a) << '\n';
    }
    out.precision(old_precision);
}

nlohmann::json norm_summary(const LatticeFunction& u, const WeightFamily& w) {
    return {{"norm", h_phi_norm(u, w)},
            {"s_or_family", w.source()},
            {"box", {{"n", u.box().dimension()}, {"N", u.box().radius()}}}};
}

}  // namespace sobscale
