#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sobscale {

/// Immutable positive function of one real variable, built from a closed set
/// of named families and combinators so every instance has a closed form.
///
/// Families (t > 0):
///   power          t^s
///   power_log      t^s (log(e + t))^r
///   power_loglog   t^s (log(e + log(e + t)))^r
///   exp_sqrt_log   t^s exp(c sqrt(log max(t, 1)))
///   osc_exponent   t^(s + amp sin(log t))
///   log_power      (1 + log max(t, 1))^r
///   cap            min(t, c)
///   constant       c
/// Combinators:
///   product, power (f^p), reciprocal, compose_quadratic f0 psi(f1 / f0),
///   interp_parameter (psi built from phi), reconstruct (phi built from psi).
class PositiveFunction {
public:
    enum class Kind {
        power,
        power_log,
        power_loglog,
        exp_sqrt_log,
        osc_exponent,
        log_power,
        cap,
        constant,
        product,
        power_of,
        reciprocal,
        compose_quadratic,
        interp_parameter,
        reconstruct,
    };

    static PositiveFunction power(double s);
    static PositiveFunction power_log(double s, double r);
    static PositiveFunction power_loglog(double s, double r);
    static PositiveFunction exp_sqrt_log(double s, double c);
    static PositiveFunction osc_exponent(double s, double amp);
    static PositiveFunction log_power(double r);
    static PositiveFunction cap(double c);
    static PositiveFunction constant(double c);

    static PositiveFunction product(std::vector<PositiveFunction> factors);
    static PositiveFunction power_of(PositiveFunction f, double p);
    static PositiveFunction reciprocal(PositiveFunction f);
    static PositiveFunction compose_quadratic(PositiveFunction f0, PositiveFunction f1, PositiveFunction psi);
    static PositiveFunction interp_parameter(PositiveFunction phi, double s0, double s1);
    static PositiveFunction reconstruct(PositiveFunction psi, double s0, double s1);

    /// Unchecked evaluation.
    double operator()(double t) const;
    /// Evaluation that throws DomainError (naming t) on non-positive or
    /// non-finite results.
    double evaluate(double t) const;

    Kind kind() const;

    nlohmann::json to_json() const;
    static PositiveFunction from_json(const nlohmann::json& j);

private:
    struct Node;
    explicit PositiveFunction(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Declared constants of c^{-1} lambda^{s0} <= phi(lambda t)/phi(t) <= c lambda^{s1}.
struct RoBounds {
    double s0;
    double s1;
    double c;
};

/// A positive function on [1, inf), RO-varying at infinity.
class ROFunction {
public:
    explicit ROFunction(PositiveFunction f, std::optional<RoBounds> declared = std::nullopt);

    static ROFunction from_json(const nlohmann::json& j);

    /// Throws DomainError for t < 1 or a non-positive / non-finite value.
    double operator()(double t) const;

    const PositiveFunction& expr() const { return expr_; }
    const std::optional<RoBounds>& declared_bounds() const { return declared_; }
    nlohmann::json to_json() const { return expr_.to_json(); }

private:
    PositiveFunction expr_;
    std::optional<RoBounds> declared_;
};

enum class ParameterProvenance { constructed_from_phi, user_supplied };

/// A function psi: (0, inf) -> (0, inf) of class B used as interpolation parameter.
class InterpParameter {
public:
    explicit InterpParameter(PositiveFunction f,
                             ParameterProvenance provenance = ParameterProvenance::user_supplied,
                             std::optional<std::pair<double, double>> exponents = std::nullopt);

    static InterpParameter from_json(const nlohmann::json& j);

    /// Throws DomainError for tau <= 0 or a non-positive / non-finite value.
    double operator()(double tau) const;

    const PositiveFunction& expr() const { return expr_; }
    ParameterProvenance provenance() const { return provenance_; }
    /// (s0, s1) the parameter was constructed with, if any.
    std::optional<std::pair<double, double>> exponents() const { return exponents_; }
    nlohmann::json to_json() const;

private:
    PositiveFunction expr_;
    ParameterProvenance provenance_;
    std::optional<std::pair<double, double>> exponents_;
};

/// Description of the (t, lambda) sample set behind an analysis.
struct SampleGrid {
    double t_min = 1.0;
    double t_max = 1.0;
    int t_points = 0;
    double lambda_min = 1.0;
    double lambda_max = 1.0;
    int lambda_points = 0;
    std::string spacing = "log";

    nlohmann::json to_json() const;
};

struct ROAnalysis {
    double sigma0 = 0.0;
    double sigma1 = 0.0;
    double c_estimate = 1.0;
    SampleGrid grid;
    bool pass = false;
    /// Estimator internals (raw secant envelope, trend slope, method used).
    nlohmann::json details = nlohmann::json::object();

    nlohmann::json to_json() const;
};

/// Scans t in [1, t_max] (grid_density points per decade, log-spaced) and
/// lambda in [1, a] (grid_density + 1 log-spaced points, both ends exact).
/// c_estimate = max over the scan of max(ratio, 1/ratio).
ROAnalysis verify_ro(const ROFunction& phi, double a, double t_max, int grid_density = 16);

/// Grid estimate of the lower/upper Matuszewska indices.
///
/// The secant exponent S(t) = log(phi(L t)/phi(t)) / log L at L = lambda_max is
/// sampled on a log grid over [1, t_max] (16 points per decade). Slowly varying
/// factors bias S by O(1 / log t), so on the tail window [t_max/100, t_max] a
/// least-squares trend b / log(t sqrt(L)) is removed. If the corrected tail
/// values agree within `kTrendSpread`, their envelope is the estimate;
/// otherwise the raw envelope of S over the whole grid is reported.
ROAnalysis estimate_matuszewska(const ROFunction& phi, double lambda_max = 1e4, double t_max = 1e6);

inline constexpr double kTrendSpread = 0.02;

/// psi(tau) = tau^{-s0/(s1-s0)} phi(tau^{1/(s1-s0)}) for tau >= 1, phi(1) below.
/// If `analysis` is given, requires s0 < sigma0 and s1 > sigma1.
InterpParameter make_interp_parameter(const ROFunction& phi, double s0, double s1,
                                      const ROAnalysis* analysis = nullptr);

/// phi(t) = t^{s0} psi(t^{s1-s0}).
ROFunction reconstruct_phi(const InterpParameter& psi, double s0, double s1);

/// True if phi0/phi1 does not grow on [1, 1e8] (log-sampled): the maximum over
/// the last decade is at most twice the maximum before it.
bool ratio_bounded_near_infinity(const ROFunction& phi0, const ROFunction& phi1);

/// phi(t) = phi0(t) psi(phi1(t)/phi0(t)). Appends a warning if phi0/phi1 looks
/// unbounded near infinity.
ROFunction quadratic_compose(const ROFunction& phi0, const ROFunction& phi1, const InterpParameter& psi,
                             std::vector<std::string>* warnings = nullptr);

struct PseudoconcavityReport {
    bool pass = false;
    double hull_ratio = 0.0;          ///< sup psi1/psi on [c_onset, t_max]
    double hull_ratio_doubled = 0.0;  ///< same on [c_onset, 2 t_max]
    double threshold = 10.0;
    int samples = 0;

    nlohmann::json to_json() const;
};

/// Heuristic pseudoconcavity check: least concave majorant psi1 of the sampled
/// psi (upper hull in (t, psi) coordinates), pass iff sup psi1/psi <= threshold
/// on both [c_onset, t_max] and [c_onset, 2 t_max] and the ratio does not grow
/// by more than 5% under the doubling.
PseudoconcavityReport check_pseudoconcave(const InterpParameter& psi, double c_onset, double t_max,
                                          int samples = 400, double threshold = 10.0);

/// Sampled class-B check: psi and 1/psi bounded on [a, b] grids and 1/psi
/// bounded on (c, t_max]. Returns the sampled extremes.
struct ClassBReport {
    bool pass = false;
    double min_value = 0.0;
    double max_value = 0.0;
    nlohmann::json to_json() const;
};
ClassBReport check_class_b(const InterpParameter& psi, double lo = 1e-6, double hi = 1e8);

/// Log-spaced grid with `per_decade` points per decade on [lo, hi], both ends exact.
std::vector<double> log_grid(double lo, double hi, int per_decade);

}  // namespace sobscale
