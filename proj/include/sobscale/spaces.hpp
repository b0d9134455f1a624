#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sobscale/lattice.hpp"
#include "sobscale/ro.hpp"

namespace sobscale {

/// Precomputed weights phi(<k>) on a box: the whole H^phi norm machinery.
class WeightFamily {
public:
    /// phi(t) = t^s, weight(k) = <k>^s.
    static WeightFamily sobolev(const LatticeBox& box, double s);
    /// weight(k) = phi(<k>).
    static WeightFamily from_phi(const LatticeBox& box, const ROFunction& phi);
    /// Arbitrary positive weights (used for derived spaces); `label` describes them.
    static WeightFamily from_weights(const LatticeBox& box, std::vector<double> weights, nlohmann::json label);

    const LatticeBox& box() const { return box_; }
    std::span<const double> weights() const { return weights_; }
    double operator[](std::size_t i) const { return weights_[i]; }

    /// Exponent s when built by sobolev().
    std::optional<double> exponent() const { return exponent_; }
    /// {"s": ...} or the family JSON.
    const nlohmann::json& source() const { return source_; }

private:
    WeightFamily(LatticeBox box, std::vector<double> weights, nlohmann::json source, std::optional<double> s);

    LatticeBox box_;
    std::vector<double> weights_;
    nlohmann::json source_;
    std::optional<double> exponent_;
};

/// sqrt(sum_k w(k)^2 |u(k)|^2)
double h_phi_norm(const LatticeFunction& u, const WeightFamily& w);
/// sum_k w(k)^2 u(k) conj(v(k))
Complex h_phi_inner(const LatticeFunction& u, const LatticeFunction& v, const WeightFamily& w);

/// Convenience: ||u||_{H^(s)}.
double sobolev_norm(const LatticeFunction& u, double s);

struct PairingBound {
    Complex pairing;  ///< (u, v)
    double bound;     ///< ||u||_{H^(s)} ||v||_{H^(-s)}
};

PairingBound duality_pairing_bound(const LatticeFunction& u, const LatticeFunction& v, double s);

struct DualitySup {
    double sup_value;
    /// v*(k) = <k>^{2s} u(k) / ||u||_{H^(s)}: unit norm in H^(-s), (u, v*) = ||u||_{H^(s)}.
    LatticeFunction maximizer;
};

/// Attains sup{|(u, v)| : ||v||_{H^(-s)} = 1}; throws DegenerateInputError for u = 0.
DualitySup duality_sup(const LatticeFunction& u, double s);

struct LinfEmbedding {
    double constant;  ///< C_N = (sum_box w(k)^{-2})^{1/2}
    /// (radius, C) on nested boxes of radius 1, 2, 4, ... and the full radius.
    std::vector<std::pair<int, double>> trend;

    nlohmann::json to_json() const;
};

LinfEmbedding linf_embedding_constant(const WeightFamily& w);

/// sup_k w0(k)/w1(k): norm of the identity H^{phi1} -> H^{phi0} on the box.
double embedding_ratio(const WeightFamily& w0, const WeightFamily& w1);

/// CSV rows (k..., weight, |u(k)|, contribution) with contribution = (w |u|)^2.
void write_norm_breakdown_csv(std::ostream& out, const LatticeFunction& u, const WeightFamily& w);
/// {"norm": ..., "s_or_family": ..., "box": {"n":..,"N":..}}
nlohmann::json norm_summary(const LatticeFunction& u, const WeightFamily& w);

}  // namespace sobscale
