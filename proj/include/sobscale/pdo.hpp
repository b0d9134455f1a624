#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sobscale/lattice.hpp"
#include "sobscale/linalg.hpp"
#include "sobscale/report.hpp"
#include "sobscale/ro.hpp"
#include "sobscale/torus.hpp"

namespace sobscale {

/// Torus mode coeff * e^{2 pi i q.x}.
struct SymbolMode {
    std::vector<int> q;
    Complex coeff;
};

/// f(<k>) * sum_modes coeff e^{2 pi i q.x}.
struct SymbolTerm {
    /// {"family":"bracket_power","s":..}, {"family":"constant","c":..}, or any
    /// PositiveFunction JSON applied to <k>.
    nlohmann::json k_factor_json;
    PositiveFunction k_factor;
    std::vector<SymbolMode> modes;

    static SymbolTerm make(nlohmann::json k_factor, std::vector<SymbolMode> modes);
};

/// Symbol a(k, x) of order m on Z^n x T^n.
///
/// Built either from terms (finite sums of k-multipliers times trigonometric
/// polynomials, with closed-form x-derivatives) or from an arbitrary
/// evaluator. Evaluators carry no derivative formula; they support
/// x-derivatives only when a mode radius is declared, via spectral
/// differentiation on the grid.
class Symbol {
public:
    using Evaluator = std::function<Complex(std::span<const int> k, std::span<const double> x)>;

    Symbol(double order, std::vector<SymbolTerm> terms);
    static Symbol custom(int dimension, double order, Evaluator evaluator, std::optional<int> mode_radius);

    /// <k>^s, order s.
    static Symbol bracket_power(double s);

    static Symbol from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    double order() const { return order_; }
    const std::vector<SymbolTerm>& terms() const { return terms_; }
    /// Torus dimension fixed by the modes; 0 if the symbol has none (any n).
    int dimension() const { return dimension_; }
    /// max |q_j| over modes; empty for evaluators without a declared radius.
    std::optional<int> mode_radius() const { return mode_radius_; }
    bool is_custom() const { return static_cast<bool>(evaluator_); }
    /// Independent of x.
    bool is_multiplier() const;
    bool has_derivative_oracle() const { return !is_custom(); }

    Complex operator()(std::span<const int> k, std::span<const double> x) const;
    /// D^(beta)_x a(k, x) in closed form (term symbols only).
    Complex derivative(std::span<const int> k, std::span<const double> x, const MultiIndex& beta) const;
    /// a(k, .) at every node of `grid`, exact roots of unity for term symbols.
    std::vector<Complex> sample(std::span<const int> k, const TorusGrid& grid) const;

private:
    double order_ = 0.0;
    std::vector<SymbolTerm> terms_;
    int dimension_ = 0;
    std::optional<int> mode_radius_;
    Evaluator evaluator_;
};

struct PdoDiagnostics {
    /// l2 norm of the part of T_a u outside the box.
    double leakage = 0.0;
    std::vector<std::string> warnings;
};

inline constexpr double kLeakageWarnThreshold = 1e-12;

/// Smallest M with exact quadrature for a box of radius N and mode radius r.
int required_points(int radius, int mode_radius);

/// (T_a u)(k) = M^{-n} sum_x e^{2 pi i k.x} a(k, x) u^(x), computed on the box
/// enlarged by the mode radius and restricted back. Throws ResolutionError
/// unless M >= 2N + 2r + 1.
LatticeFunction pdo_apply(const Symbol& a, const LatticeFunction& u, const TorusGrid& grid,
                          PdoDiagnostics* diagnostics = nullptr);

struct PdoMatrix {
    LatticeBox box;
    TorusGrid grid;
    Matrix entries;
    nlohmann::json symbol_ref;
    double max_leakage = 0.0;
};

/// Column j is pdo_apply(a, delta at box point j). Multiplier symbols are
/// checked to give diag(a(k)).
PdoMatrix pdo_matrix(const Symbol& a, const LatticeBox& box, const TorusGrid& grid);

/// Conjugate transpose: (T u, v) = (u, T^dagger v).
PdoMatrix formal_adjoint(const PdoMatrix& t);

struct SymbolEstimate {
    MultiIndex alpha;
    MultiIndex beta;
    /// max_k g(k) / (1+|k|)^{m-|alpha|}, g(k) = sup_x |D^(beta) Delta^alpha a(k, x)|.
    double c = 0.0;
    /// Slope of log g against log(1+|k|) between the two outermost dyadic
    /// shells; empty when g vanishes there.
    std::optional<double> slope;
};

struct Ellipticity {
    /// (R, C(R)) with C(R) = min over |k| > R and grid x of |a| / (1+|k|)^m.
    std::vector<std::pair<double, double>> table;
    /// Same minima on a refined torus grid.
    std::vector<double> refined;
    double c = 0.0;
    double r = 0.0;
    bool pass = false;

    nlohmann::json to_json() const;
};

struct SymbolEstimates {
    double order = 0.0;
    std::vector<SymbolEstimate> entries;
    std::optional<Ellipticity> ellipticity;
    /// Every available slope is at most m - |alpha| + kSlopeMargin.
    bool consistent = false;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

inline constexpr double kSlopeMargin = 0.1;

/// Throws CapabilityError when beta > 0 is requested for an evaluator symbol
/// without a declared mode radius.
SymbolEstimates symbol_class_estimate(const Symbol& a, const LatticeBox& box, const TorusGrid& grid, int max_alpha,
                                      int max_beta);

/// Pass iff the refined minima stay above kEllipticFloor and within a factor
/// 2 of the grid minima (a zero set between nodes shows up as a collapse).
Ellipticity ellipticity_estimate(const Symbol& a, const LatticeBox& box, const TorusGrid& grid);

inline constexpr double kEllipticFloor = 1e-8;

/// (N, ||W_out T_a W_in^{-1}||_2) with W_in = diag phi(<k>),
/// W_out = diag <k>^{-m} phi(<k>), on the default grid for each box.
std::vector<std::pair<int, double>> mapping_norm_scan(const Symbol& a, const ROFunction& phi, int dimension,
                                                      const std::vector<int>& radii);

struct FredholmOptions {
    double tol = 1e-8;
    /// Second smoothness index for the rank-defect comparison.
    std::optional<double> s_alt;
    /// Replace T by (T + T^dagger)/2 before analysis.
    bool symmetrize = false;
    std::uint64_t seed = 0x5eed;
};

struct FredholmReport {
    double s = 0.0;
    double s_alt = 0.0;
    int dim_ker = 0;
    int dim_coker = 0;
    int index = 0;
    Eigen::VectorXd smallest_singulars;
    int rank_defect = 0;
    int rank_defect_alt = 0;
    /// ||B T - I||_2 with B the pseudoinverse.
    double parametrix_residual = 0.0;
    /// ||v - P_ran v - P_ker(T^dagger) v|| / ||v|| for a random v.
    double decomposition_residual = 0.0;
    /// |(P_ran v, P_ker v)| / ||v||^2
    double decomposition_overlap = 0.0;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

/// SVD surrogate for T_a: H^(s) -> H^(s-m) on the truncation.
FredholmReport fredholm_surrogate(const Symbol& a, double s, const LatticeBox& box, const TorusGrid& grid,
                                  const FredholmOptions& options = {});

struct AScale {
    Matrix op;
    Eigen::VectorXd eigenvalues;
    Matrix eigenvectors;
    ROFunction phi;
    LatticeBox box;
    double shift = 0.0;
    double hermiticity_defect = 0.0;
    std::vector<std::string> warnings;
};

/// A = (T + T^dagger)/2 + c I with c = max(0, 1 - lambda_min), then A = U L U^H.
/// Throws ParameterError unless the symbol has order 1.
AScale ascale_build(const Symbol& a, const LatticeBox& box, const TorusGrid& grid, const ROFunction& phi);

/// ||phi(L) U^H u||
double ascale_norm(const LatticeFunction& u, const AScale& scale);

/// Ratios ascale_norm(u)/||u||_{H^phi} per box; pass iff every band lies in
/// [1/kappa, kappa] and the band width never grows with N.
ClaimReport verify_theorem7(const Symbol& a, const ROFunction& phi, int dimension, const std::vector<int>& radii,
                            int trials, std::uint64_t seed, double kappa = 2.0);

/// Rows "row,col,re,im".
void write_matrix_csv(std::ostream& out, const Matrix& m);
/// "SOBSCALE", uint64 rows, uint64 cols (little endian), then column-major
/// (re, im) doubles.
void write_matrix_binary(std::ostream& out, const Matrix& m);
Matrix read_matrix_binary(std::istream& in);

}  // namespace sobscale
