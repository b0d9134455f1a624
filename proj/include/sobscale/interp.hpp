#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sobscale/lattice.hpp"
#include "sobscale/linalg.hpp"
#include "sobscale/report.hpp"
#include "sobscale/ro.hpp"
#include "sobscale/spaces.hpp"

namespace sobscale {

/// Ordered pair [H0, H1] of weighted spaces on one box, with generating
/// multiplier J(k) = w1(k)/w0(k), so that ||J u||_{H0} = ||u||_{H1}.
class AdmissiblePair {
public:
    AdmissiblePair(WeightFamily w0, WeightFamily w1);

    const LatticeBox& box() const { return w0_.box(); }
    const WeightFamily& w0() const { return w0_; }
    const WeightFamily& w1() const { return w1_; }
    std::span<const double> generator() const { return generator_; }

    /// J u
    LatticeFunction apply_generator(const LatticeFunction& u) const;

private:
    WeightFamily w0_;
    WeightFamily w1_;
    std::vector<double> generator_;
};

/// [H^{phi0}, H^{phi1}] on `box`. Warns (via `warnings`) if phi0/phi1 looks
/// unbounded near infinity.
AdmissiblePair make_admissible_pair(const ROFunction& phi0, const ROFunction& phi1, const LatticeBox& box,
                                    std::vector<std::string>* warnings = nullptr);

/// [H^(s0), H^(s1)] on `box`; J(k) = <k>^{s1-s0}.
AdmissiblePair make_sobolev_pair(double s0, double s1, const LatticeBox& box);

/// H_psi = [H0, H1]_psi with norm ||psi(J) u||_{H0}. psi(J) is pointwise since J
/// is a multiplier, giving the effective weight w0(k) psi(J(k)).
class InterpSpace {
public:
    InterpSpace(AdmissiblePair pair, InterpParameter psi);

    const AdmissiblePair& pair() const { return pair_; }
    const InterpParameter& parameter() const { return psi_; }
    const WeightFamily& weights() const { return weights_; }

private:
    AdmissiblePair pair_;
    InterpParameter psi_;
    WeightFamily weights_;
};

double interp_norm(const LatticeFunction& u, const InterpSpace& space);
Complex interp_inner(const LatticeFunction& u, const LatticeFunction& v, const InterpSpace& space);

inline constexpr double kIdentityTolerance = 1e-12;

/// [H^(s0), H^(s1)]_psi = H^phi with psi built from phi; compares norms on
/// `trials` random functions (plus delta_0). Throws ParameterError if (s0, s1)
/// does not straddle the estimated Matuszewska indices of phi.
ClaimReport verify_theorem2(const ROFunction& phi, double s0, double s1, const LatticeBox& box, int trials,
                            std::uint64_t seed);

/// [H^{phi0}, H^{phi1}]_psi = H^phi with phi = phi0 psi(phi1/phi0).
ClaimReport verify_theorem3(const ROFunction& phi0, const ROFunction& phi1, const InterpParameter& psi,
                            const LatticeBox& box, int trials, std::uint64_t seed);

/// [H_lambda, H_eta]_psi = H_omega with omega = lambda psi(eta/lambda), over `pair`.
ClaimReport verify_reiteration(const AdmissiblePair& pair, const InterpParameter& lambda, const InterpParameter& eta,
                               const InterpParameter& psi, int trials, std::uint64_t seed);

struct OperatorBound {
    double n0 = 0.0;     ///< ||T||_{H0 -> H0}
    double n1 = 0.0;     ///< ||T||_{H1 -> H1}
    double n_psi = 0.0;  ///< ||T||_{H_psi -> H_psi}
    /// n_psi / max(n0, n1)
    double ratio = 0.0;
    int max_iterations_used = 0;
    bool converged = true;
    /// Dense-SVD values for boxes with at most kDenseCheckLimit points.
    std::optional<double> dense_n0, dense_n1, dense_n_psi;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

inline constexpr std::size_t kDenseCheckLimit = 500;

/// Endpoint and interpolated operator norms of T (a matrix on the pair's box in
/// enumeration order) by power iteration on the weight-conjugated matrices.
OperatorBound interp_operator_bound(const Matrix& t, const AdmissiblePair& pair, const InterpParameter& psi);
/// Multiplier T = diag(m).
OperatorBound interp_operator_bound(const LatticeFunction& multiplier, const AdmissiblePair& pair,
                                    const InterpParameter& psi);

}  // namespace sobscale
