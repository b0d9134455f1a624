#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sobscale/error.hpp"
#include "sobscale/interp.hpp"
#include "support.hpp"

using namespace sobscale;
using sobscale::testing::random_function;
using sobscale::testing::rel_err;

namespace {

using PF = PositiveFunction;

/// sqrt(sum_k <k>^{2s} |u(k)|^2) straight from the definition.
double sobolev_oracle(const LatticeFunction& u, double s) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < u.size(); ++i) {
        long double b = 1.0L;
        for (int kj : u.box().point(i)) b += static_cast<long double>(kj) * kj;
        acc += std::pow(b, static_cast<long double>(s)) * std::norm(u[i]);
    }
    return static_cast<double>(std::sqrt(acc));
}

/// (Delta u)(k) = u(k+1) - u(k) on a 1-d box with zero extension.
Matrix forward_difference_matrix(const LatticeBox& line) {
    const auto n = static_cast<Eigen::Index>(line.size());
    Matrix d = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = -1.0;
        if (i + 1 < n) d(i, i + 1) = 1.0;
    }
    return d;
}

}  // namespace

TEST(AdmissiblePair, GeneratorIsWeightRatio) {
    const LatticeBox box(2, 3);
    const auto pair = make_sobolev_pair(0.5, 2.0, box);
    for (std::size_t i = 0; i < box.size(); ++i) {
        EXPECT_LE(rel_err(pair.generator()[i], std::pow(japanese_bracket(box.point(i)), 1.5)), 1e-15);
    }
    for (std::uint64_t t = 0; t < 20; ++t) {
        const auto u = random_function(box, 40, t);
        EXPECT_LE(rel_err(h_phi_norm(pair.apply_generator(u), pair.w0()), h_phi_norm(u, pair.w1())), 1e-13);
    }
}

TEST(AdmissiblePair, RejectsMismatchedBoxes) {
    EXPECT_THROW(AdmissiblePair(WeightFamily::sobolev(LatticeBox(1, 2), 0.0), WeightFamily::sobolev(LatticeBox(1, 3), 1.0)),
                 ShapeError);
}

TEST(AdmissiblePair, WarnsOnUnboundedRatio) {
    std::vector<std::string> warnings;
    make_admissible_pair(ROFunction(PF::power(2.0)), ROFunction(PF::power(1.0)), LatticeBox(1, 4), &warnings);
    EXPECT_FALSE(warnings.empty());
    warnings.clear();
    make_admissible_pair(ROFunction(PF::power(1.0)), ROFunction(PF::power(2.0)), LatticeBox(1, 4), &warnings);
    EXPECT_TRUE(warnings.empty());
}

TEST(InterpNorm, PowerParameterGivesIntermediateSobolev) {
    // [H^(s0), H^(s1)] with psi = tau^theta is H^((1-theta) s0 + theta s1).
    const LatticeBox box(2, 4);
    for (double theta : {0.0, 0.25, 0.5, 0.9}) {
        const double s0 = -1.0, s1 = 2.0;
        const InterpSpace space(make_sobolev_pair(s0, s1, box), InterpParameter(PF::power(theta)));
        for (std::uint64_t t = 0; t < 20; ++t) {
            const auto u = random_function(box, 41, t);
            EXPECT_LE(rel_err(interp_norm(u, space), sobolev_oracle(u, (1 - theta) * s0 + theta * s1)), 1e-12);
        }
    }
}

TEST(InterpNorm, ConstantParameterRecoversH0) {
    const LatticeBox box(1, 6);
    const auto pair = make_sobolev_pair(0.3, 1.7, box);
    const InterpSpace space(pair, InterpParameter(PF::constant(1.0)));
    const auto u = random_function(box, 42);
    EXPECT_LE(rel_err(interp_norm(u, space), h_phi_norm(u, pair.w0())), 1e-15);
}

TEST(InterpInner, ConsistentWithNorm) {
    const LatticeBox box(1, 8);
    const InterpSpace space(make_sobolev_pair(0.0, 2.0, box), InterpParameter(PF::power_log(0.5, 1.0)));
    for (std::uint64_t t = 0; t < 20; ++t) {
        const auto u = random_function(box, 43, t);
        EXPECT_LE(rel_err(interp_inner(u, u, space).real(), std::pow(interp_norm(u, space), 2)), 1e-13);
    }
}

TEST(VerifyTheorem2, Families) {
    const std::vector<PF> phis = {PF::power(1.5), PF::power_log(1.5, 1.0), PF::power_loglog(1.0, 1.0),
                                  PF::exp_sqrt_log(1.0, 1.0), PF::osc_exponent(1.0, 0.05)};
    const LatticeBox box(2, 6);
    for (const auto& f : phis) {
        const auto r = verify_theorem2(ROFunction(f), -1.0, 3.0, box, 50, 7);
        EXPECT_TRUE(r.pass) << f.to_json().dump();
        EXPECT_LE(r.max_rel_deviation, 1e-12);
        EXPECT_EQ(r.trials, 50);
    }
}

TEST(VerifyTheorem2, PowerMatchesSobolevOracle) {
    // With phi = t^s the interpolated norm is the H^(s) norm computed from the definition.
    const LatticeBox box(1, 10);
    const ROFunction phi(PF::power(1.2));
    const auto psi = make_interp_parameter(phi, 0.0, 2.0);
    const InterpSpace space(make_sobolev_pair(0.0, 2.0, box), psi);
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto u = random_function(box, 44, t);
        EXPECT_LE(rel_err(interp_norm(u, space), sobolev_oracle(u, 1.2)), 1e-12);
    }
}

TEST(VerifyTheorem2, RejectsNonStraddlingExponents) {
    EXPECT_THROW(verify_theorem2(ROFunction(PF::power(1.5)), 1.6, 3.0, LatticeBox(1, 4), 5, 1), ParameterError);
    EXPECT_THROW(verify_theorem2(ROFunction(PF::power(1.5)), 2.0, 1.0, LatticeBox(1, 4), 5, 1), ParameterError);
}

TEST(VerifyTheorem3, ClosedFormTriple) {
    // phi0 = t, phi1 = t^3, psi = tau^{1/2}: H^(2).
    const LatticeBox box(2, 5);
    const InterpSpace space(make_admissible_pair(ROFunction(PF::power(1.0)), ROFunction(PF::power(3.0)), box),
                            InterpParameter(PF::power(0.5)));
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto u = random_function(box, 45, t);
        EXPECT_LE(rel_err(interp_norm(u, space), sobolev_oracle(u, 2.0)), 1e-12);
    }
    const auto r = verify_theorem3(ROFunction(PF::power(1.0)), ROFunction(PF::power(3.0)),
                                   InterpParameter(PF::power(0.5)), box, 50, 3);
    EXPECT_TRUE(r.pass);
    EXPECT_TRUE(r.warnings.empty());
}

TEST(VerifyTheorem3, LogarithmicTriple) {
    // phi0 = 1, phi1 = t, psi = tau / (1 + log max(tau, 1)): weight <k> / (1 + log <k>).
    const LatticeBox box(1, 12);
    const InterpParameter psi(PF::product({PF::power(1.0), PF::log_power(-1.0)}));
    const InterpSpace space(make_admissible_pair(ROFunction(PF::constant(1.0)), ROFunction(PF::power(1.0)), box), psi);
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto u = random_function(box, 46, t);
        long double acc = 0.0L;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double b = japanese_bracket(box.point(i));
            const double w = b / (1.0 + std::log(b));
            acc += static_cast<long double>(w) * w * std::norm(u[i]);
        }
        EXPECT_LE(rel_err(interp_norm(u, space), static_cast<double>(std::sqrt(acc))), 1e-12);
    }
    EXPECT_TRUE(verify_theorem3(ROFunction(PF::constant(1.0)), ROFunction(PF::power(1.0)), psi, box, 50, 4).pass);
}

TEST(VerifyReiteration, PowerParameters) {
    // Over [H^(0), H^(4)]: lambda = tau^{1/4} gives H^(1), eta = tau^{3/4} gives H^(3),
    // and psi = tau^{1/2} between them gives H^(2).
    const LatticeBox box(1, 10);
    const auto pair = make_sobolev_pair(0.0, 4.0, box);
    const InterpParameter lambda(PF::power(0.25)), eta(PF::power(0.75)), psi(PF::power(0.5));
    const auto r = verify_reiteration(pair, lambda, eta, psi, 100, 5);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.max_rel_deviation, 1e-12);
    const InterpSpace two_step(AdmissiblePair(InterpSpace(pair, lambda).weights(), InterpSpace(pair, eta).weights()),
                               psi);
    for (std::uint64_t t = 0; t < 20; ++t) {
        const auto u = random_function(box, 47, t);
        EXPECT_LE(rel_err(interp_norm(u, two_step), sobolev_oracle(u, 2.0)), 1e-12);
    }
}

TEST(VerifyReiteration, LogarithmicParameters) {
    const LatticeBox box(2, 5);
    const auto pair = make_sobolev_pair(0.0, 2.0, box);
    const auto r = verify_reiteration(pair, InterpParameter(PF::power_log(0.25, 1.0)),
                                      InterpParameter(PF::power_log(0.75, -1.0)), InterpParameter(PF::power(0.5)), 50, 6);
    EXPECT_TRUE(r.pass);
}

TEST(InterpOperatorBound, MultiplierNormIsSupremum) {
    const LatticeBox box(1, 8);
    const auto m = random_function(box, 48);
    double sup = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) sup = std::max(sup, std::abs(m[i]));
    const auto b = interp_operator_bound(m, make_sobolev_pair(0.0, 2.0, box), InterpParameter(PF::power(0.5)));
    EXPECT_LE(rel_err(b.n0, sup), 1e-9);
    EXPECT_LE(rel_err(b.n1, sup), 1e-9);
    EXPECT_LE(rel_err(b.n_psi, sup), 1e-9);
    ASSERT_TRUE(b.dense_n0.has_value());
    EXPECT_LE(rel_err(*b.dense_n_psi, sup), 1e-12);
    EXPECT_LE(b.ratio, 1.0 + 1e-9);
}

TEST(InterpOperatorBound, ForwardDifferenceInterpolationInequality) {
    const LatticeBox line(1, 16);
    const auto pair = make_sobolev_pair(0.0, 2.0, line);
    const Matrix d = forward_difference_matrix(line);
    for (double theta : {0.25, 0.5, 0.75}) {
        const auto b = interp_operator_bound(d, pair, InterpParameter(PF::power(theta)));
        ASSERT_TRUE(b.dense_n0.has_value());
        // Power iteration never overshoots the dense SVD and either agrees or says it stalled.
        EXPECT_LE(b.n0, *b.dense_n0 * (1 + 1e-12));
        EXPECT_LE(b.n1, *b.dense_n1 * (1 + 1e-12));
        EXPECT_LE(b.n_psi, *b.dense_n_psi * (1 + 1e-12));
        const double worst = std::max({rel_err(b.n0, *b.dense_n0), rel_err(b.n1, *b.dense_n1),
                                       rel_err(b.n_psi, *b.dense_n_psi)});
        if (b.converged) {
            EXPECT_LE(worst, 1e-6);
        } else {
            EXPECT_FALSE(b.warnings.empty());
            EXPECT_LE(worst, 1e-3);
        }
        // Exact interpolation of exponent theta.
        EXPECT_LE(*b.dense_n_psi, std::pow(*b.dense_n0, 1 - theta) * std::pow(*b.dense_n1, theta) * (1 + 1e-9));
        // Unweighted norm of the forward difference is below 2.
        EXPECT_LE(*b.dense_n0, 2.0);
    }
}

TEST(InterpOperatorBound, RejectsWrongShape) {
    const auto pair = make_sobolev_pair(0.0, 1.0, LatticeBox(1, 2));
    EXPECT_THROW(interp_operator_bound(Matrix::Identity(3, 3), pair, InterpParameter(PF::power(0.5))), ShapeError);
}
