#include "sobscale/interp.hpp"

#include <algorithm>
#include <cmath>

#include "sobscale/error.hpp"
#include "sobscale/random.hpp"

namespace sobscale {

namespace {

double rel_dev(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Compares two norms on delta_0 plus `trials` random functions.
template <typename Lhs, typename Rhs>
double max_deviation(const LatticeBox& box, int trials, std::uint64_t seed, Lhs&& lhs, Rhs&& rhs) {
    double worst = rel_dev(lhs(LatticeFunction::delta(box, box.point(box.origin()))),
                           rhs(LatticeFunction::delta(box, box.point(box.origin()))));
    const CounterRng rng(seed);
    for (int t = 0; t < trials; ++t) {
        const auto u = random_lattice_function(box, rng.substream(static_cast<std::uint64_t>(t)));
        worst = std::max(worst, rel_dev(lhs(u), rhs(u)));
    }
    return worst;
}

nlohmann::json box_json(const LatticeBox& box) { return {{"n", box.dimension()}, {"N", box.radius()}}; }

}  // namespace

AdmissiblePair::AdmissiblePair(WeightFamily w0, WeightFamily w1) : w0_(std::move(w0)), w1_(std::move(w1)) {
    if (!(w0_.box() == w1_.box())) throw ShapeError("AdmissiblePair: weights live on different boxes");
    generator_.resize(w0_.box().size());
    for (std::size_t i = 0; i < generator_.size(); ++i) {
        generator_[i] = w1_[i] / w0_[i];
        if (!(generator_[i] > 0.0) || !std::isfinite(generator_[i])) {
            throw DomainError("AdmissiblePair: generating multiplier is not positive and finite");
        }
    }
}

LatticeFunction AdmissiblePair::apply_generator(const LatticeFunction& u) const {
    if (!(u.box() == box())) throw ShapeError("apply_generator: function lives on a different box");
    LatticeFunction out = u;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= generator_[i];
    return out;
}

AdmissiblePair make_admissible_pair(const ROFunction& phi0, const ROFunction& phi1, const LatticeBox& box,
                                    std::vector<std::string>* warnings) {
    if (warnings && !ratio_bounded_near_infinity(phi0, phi1)) {
        warnings->push_back("make_admissible_pair: phi0/phi1 appears unbounded near infinity");
    }
    return AdmissiblePair(WeightFamily::from_phi(box, phi0), WeightFamily::from_phi(box, phi1));
}

AdmissiblePair make_sobolev_pair(double s0, double s1, const LatticeBox& box) {
    return AdmissiblePair(WeightFamily::sobolev(box, s0), WeightFamily::sobolev(box, s1));
}

namespace {

WeightFamily effective_weights(const AdmissiblePair& pair, const InterpParameter& psi) {
    const auto j = pair.generator();
    std::vector<double> w(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) w[i] = pair.w0()[i] * psi(j[i]);
    return WeightFamily::from_weights(pair.box(), std::move(w),
                                      {{"interpolated", {{"h0", pair.w0().source()},
                                                         {"h1", pair.w1().source()},
                                                         {"psi", psi.expr().to_json()}}}});
}

}  // namespace

InterpSpace::InterpSpace(AdmissiblePair pair, InterpParameter psi)
    : pair_(std::move(pair)), psi_(std::move(psi)), weights_(effective_weights(pair_, psi_)) {}

double interp_norm(const LatticeFunction& u, const InterpSpace& space) { return h_phi_norm(u, space.weights()); }

Complex interp_inner(const LatticeFunction& u, const LatticeFunction& v, const InterpSpace& space) {
    return h_phi_inner(u, v, space.weights());
}

ClaimReport verify_theorem2(const ROFunction& phi, double s0, double s1, const LatticeBox& box, int trials,
                            std::uint64_t seed) {
    if (!(s0 < s1)) throw ParameterError("verify_theorem2: need s0 < s1");
    const ROAnalysis indices = estimate_matuszewska(phi);
    const InterpParameter psi = make_interp_parameter(phi, s0, s1, &indices);
    const InterpSpace space(make_sobolev_pair(s0, s1, box), psi);
    const WeightFamily target = WeightFamily::from_phi(box, phi);

    ClaimReport r;
    r.claim = "interpolation of [H^(s0), H^(s1)] by psi(phi) equals H^phi with equal norms";
    r.parameters = {{"phi", phi.to_json()}, {"s0", s0}, {"s1", s1}, {"box", box_json(box)}, {"seed", seed},
                    {"sigma0", indices.sigma0}, {"sigma1", indices.sigma1}};
    r.trials = trials;
    r.tolerance = kIdentityTolerance;
    r.max_rel_deviation = max_deviation(
        box, trials, seed, [&](const LatticeFunction& u) { return interp_norm(u, space); },
        [&](const LatticeFunction& u) { return h_phi_norm(u, target); });
    r.pass = r.max_rel_deviation <= r.tolerance;
    return r;
}

ClaimReport verify_theorem3(const ROFunction& phi0, const ROFunction& phi1, const InterpParameter& psi,
                            const LatticeBox& box, int trials, std::uint64_t seed) {
    ClaimReport r;
    const AdmissiblePair pair = make_admissible_pair(phi0, phi1, box, &r.warnings);
    const InterpSpace space(pair, psi);
    const ROFunction phi = quadratic_compose(phi0, phi1, psi, &r.warnings);
    const WeightFamily target = WeightFamily::from_phi(box, phi);

    r.claim = "interpolation of [H^phi0, H^phi1] by psi equals H^phi with phi = phi0 psi(phi1/phi0)";
    r.parameters = {{"phi0", phi0.to_json()}, {"phi1", phi1.to_json()}, {"psi", psi.expr().to_json()},
                    {"box", box_json(box)}, {"seed", seed}};
    r.trials = trials;
    r.tolerance = kIdentityTolerance;
    r.max_rel_deviation = max_deviation(
        box, trials, seed, [&](const LatticeFunction& u) { return interp_norm(u, space); },
        [&](const LatticeFunction& u) { return h_phi_norm(u, target); });
    r.pass = r.max_rel_deviation <= r.tolerance;
    return r;
}

ClaimReport verify_reiteration(const AdmissiblePair& pair, const InterpParameter& lambda, const InterpParameter& eta,
                               const InterpParameter& psi, int trials, std::uint64_t seed) {
    ClaimReport r;
    const auto j = pair.generator();
    double lo_ratio = 0.0, hi_ratio = 0.0;
    const double j_max = *std::max_element(j.begin(), j.end());
    for (double v : j) {
        const double q = lambda(v) / eta(v);
        (v < j_max ? lo_ratio : hi_ratio) = std::max(v < j_max ? lo_ratio : hi_ratio, q);
    }
    if (hi_ratio > 2.0 * std::max(lo_ratio, 1e-300) && lo_ratio > 0.0) {
        r.warnings.push_back("verify_reiteration: lambda/eta grows at the top of the multiplier range");
    }

    // Two steps: H_lambda and H_eta over the base pair, then interpolate them by psi.
    const InterpSpace h_lambda(pair, lambda);
    const InterpSpace h_eta(pair, eta);
    const InterpSpace two_step(AdmissiblePair(h_lambda.weights(), h_eta.weights()), psi);
    // One step with omega = lambda psi(eta/lambda).
    const InterpParameter omega(PositiveFunction::compose_quadratic(lambda.expr(), eta.expr(), psi.expr()));
    const InterpSpace one_step(pair, omega);

    r.claim = "reiteration: [H_lambda, H_eta]_psi equals H_omega with omega = lambda psi(eta/lambda)";
    r.parameters = {{"lambda", lambda.expr().to_json()}, {"eta", eta.expr().to_json()},
                    {"psi", psi.expr().to_json()}, {"h0", pair.w0().source()}, {"h1", pair.w1().source()},
                    {"box", box_json(pair.box())}, {"seed", seed}};
    r.trials = trials;
    r.tolerance = kIdentityTolerance;
    r.max_rel_deviation = max_deviation(
        pair.box(), trials, seed, [&](const LatticeFunction& u) { return interp_norm(u, two_step); },
        [&](const LatticeFunction& u) { return interp_norm(u, one_step); });
    r.pass = r.max_rel_deviation <= r.tolerance;
    return r;
}

nlohmann::json OperatorBound::to_json() const {
    nlohmann::json j = {{"n0", n0}, {"n1", n1}, {"n_psi", n_psi}, {"ratio", ratio},
                        {"iterations", max_iterations_used}, {"converged", converged}};
    if (dense_n0) j["dense"] = {{"n0", *dense_n0}, {"n1", *dense_n1}, {"n_psi", *dense_n_psi}};
    if (!warnings.empty()) j["warnings"] = warnings;
    return j;
}

OperatorBound interp_operator_bound(const Matrix& t, const AdmissiblePair& pair, const InterpParameter& psi) {
    const auto size = static_cast<Eigen::Index>(pair.box().size());
    if (t.rows() != size || t.cols() != size) throw ShapeError("interp_operator_bound: matrix does not act on the pair's box");
    const InterpSpace space(pair, psi);

    OperatorBound out;
    auto norm_in = [&](const WeightFamily& w, const char* label, std::optional<double>& dense) {
        const Matrix conj = weight_conjugate(t, w.weights(), w.weights());
        const auto pi = power_iteration_norm(conj);
        out.max_iterations_used = std::max(out.max_iterations_used, pi.iterations);
        if (!pi.converged) {
            out.converged = false;
            out.warnings.push_back(std::string("power iteration for ") + label +
                                   " did not converge; relative change " + std::to_string(pi.relative_change));
        }
        if (pair.box().size() <= kDenseCheckLimit) dense = spectral_norm(conj);
        return pi.value;
    };
    out.n0 = norm_in(pair.w0(), "H0", out.dense_n0);
    out.n1 = norm_in(pair.w1(), "H1", out.dense_n1);
    out.n_psi = norm_in(space.weights(), "H_psi", out.dense_n_psi);
    const double m = std::max(out.n0, out.n1);
    out.ratio = m > 0.0 ? out.n_psi / m : 0.0;
    return out;
}

OperatorBound interp_operator_bound(const LatticeFunction& multiplier, const AdmissiblePair& pair,
                                    const InterpParameter& psi) {
    if (!(multiplier.box() == pair.box())) throw ShapeError("interp_operator_bound: multiplier lives on a different box");
    return interp_operator_bound(Matrix(to_vector(multiplier).asDiagonal()), pair, psi);
}

}  // namespace sobscale
