#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sobscale/error.hpp"
#include "sobscale/spaces.hpp"
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
        const Point k = u.box().point(i);
        long double b = 1.0L;
        for (int kj : k) b += static_cast<long double>(kj) * kj;
        acc += std::pow(b, static_cast<long double>(s)) * std::norm(u[i]);
    }
    return static_cast<double>(std::sqrt(acc));
}

}  // namespace

TEST(WeightFamily, SobolevWeightsAreExactBrackets) {
    const LatticeBox box(2, 3);
    const auto w = WeightFamily::sobolev(box, 1.5);
    for (std::size_t i = 0; i < box.size(); ++i) {
        EXPECT_EQ(w[i], std::pow(japanese_bracket(box.point(i)), 1.5));
    }
    EXPECT_EQ(w[box.origin()], 1.0);
    EXPECT_EQ(w.exponent(), 1.5);
}

TEST(WeightFamily, FromPhiAtOriginIsPhiOfOne) {
    const LatticeBox box(1, 5);
    const auto w = WeightFamily::from_phi(box, ROFunction(PF::power_log(1.0, 1.0)));
    EXPECT_DOUBLE_EQ(w[box.origin()], std::log(std::numbers::e + 1.0));
    for (std::size_t i = 0; i < box.size(); ++i) EXPECT_GE(w[i], w[box.origin()]);
}

TEST(WeightFamily, RejectsBadWeights) {
    const LatticeBox line(1, 1);
    EXPECT_THROW(WeightFamily::from_weights(line, {1.0, 0.0, 1.0}, {}), Error);
    EXPECT_THROW(WeightFamily::from_weights(line, {1.0, 1.0}, {}), Error);
}

TEST(HPhiNorm, Examples) {
    const LatticeBox plane(2, 2);
    const auto d0 = LatticeFunction::delta(plane, Point{0, 0});
    const auto de1 = LatticeFunction::delta(plane, Point{1, 0});
    EXPECT_DOUBLE_EQ(h_phi_norm(d0, WeightFamily::from_phi(plane, ROFunction(PF::power(3.0)))), 1.0);
    EXPECT_DOUBLE_EQ(h_phi_norm(d0, WeightFamily::from_phi(plane, ROFunction(PF::constant(2.5)))), 2.5);
    EXPECT_DOUBLE_EQ(h_phi_norm(de1, WeightFamily::sobolev(plane, 1.0)), std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(h_phi_norm(d0 + de1, WeightFamily::sobolev(plane, 1.0)), std::sqrt(3.0));
    EXPECT_THROW(h_phi_norm(d0, WeightFamily::sobolev(LatticeBox(2, 3), 1.0)), ShapeError);
}

TEST(HPhiNorm, MatchesDefinition) {
    for (int n = 1; n <= 3; ++n) {
        const LatticeBox box(n, 3);
        for (double s : {-1.5, 0.0, 0.5, 2.0}) {
            for (std::uint64_t t = 0; t < 10; ++t) {
                const auto u = random_function(box, 31, t);
                EXPECT_LE(rel_err(sobolev_norm(u, s), sobolev_oracle(u, s)), 1e-13);
            }
        }
    }
}

TEST(HPhiNorm, ZeroExponentIsL2) {
    const LatticeBox box(2, 4);
    for (std::uint64_t t = 0; t < 20; ++t) {
        const auto u = random_function(box, 12, t);
        EXPECT_EQ(h_phi_norm(u, WeightFamily::sobolev(box, 0.0)), lp_norm(u, 2.0));
    }
}

TEST(HPhiNorm, MonotoneInExponent) {
    const LatticeBox box(1, 8);
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto u = random_function(box, 13, t);
        double prev = 0.0;
        for (double s : {-2.0, -0.5, 0.0, 0.3, 1.0, 2.5}) {
            const double v = sobolev_norm(u, s);
            EXPECT_GE(v, prev);
            prev = v;
        }
    }
}

TEST(HPhiInner, Examples) {
    const LatticeBox line(1, 3);
    const auto w = WeightFamily::sobolev(line, 2.0);
    const auto d0 = LatticeFunction::delta(line, Point{0});
    const auto d1 = LatticeFunction::delta(line, Point{1});
    EXPECT_EQ(h_phi_inner(d0, d0, w), Complex(1.0));
    EXPECT_EQ(h_phi_inner(d0, d1, w), Complex(0.0));
}

TEST(HPhiInner, PolarizationAndParallelogram) {
    const LatticeBox box(2, 3);
    const auto w = WeightFamily::from_phi(box, ROFunction(PF::power_log(1.0, 2.0)));
    const Complex i(0.0, 1.0);
    for (std::uint64_t t = 0; t < 100; ++t) {
        const auto u = random_function(box, 14, 2 * t);
        const auto v = random_function(box, 14, 2 * t + 1);
        auto sq = [&](const LatticeFunction& f) { return std::pow(h_phi_norm(f, w), 2); };
        const Complex polar = 0.25 * (sq(u + v) - sq(u - v) + i * sq(u + i * v) - i * sq(u - i * v));
        EXPECT_LE(rel_err(polar, h_phi_inner(u, v, w)), 1e-12);
        EXPECT_LE(rel_err(sq(u + v) + sq(u - v), 2.0 * (sq(u) + sq(v))), 1e-13);
        EXPECT_LE(rel_err(h_phi_inner(u, u, w).real(), sq(u)), 1e-13);
        EXPECT_LE(rel_err(h_phi_inner(v, u, w), std::conj(h_phi_inner(u, v, w))), 1e-14);
    }
}

TEST(DualityPairingBound, Examples) {
    const LatticeBox line(1, 2);
    const auto d0 = LatticeFunction::delta(line, Point{0});
    const auto d1 = LatticeFunction::delta(line, Point{1});
    const auto eq = duality_pairing_bound(d0, d0, 3.0);
    EXPECT_EQ(eq.pairing, Complex(1.0));
    EXPECT_DOUBLE_EQ(eq.bound, 1.0);
    const auto zero = duality_pairing_bound(d0, d1, 1.0);
    EXPECT_EQ(zero.pairing, Complex(0.0));
    EXPECT_DOUBLE_EQ(zero.bound, 1.0 / std::sqrt(2.0));
}

TEST(DualityPairingBound, NeverViolated) {
    const LatticeBox box(2, 4);
    for (std::uint64_t t = 0; t < 1000; ++t) {
        const auto u = random_function(box, 15, 2 * t);
        const auto v = random_function(box, 15, 2 * t + 1);
        const auto r = duality_pairing_bound(u, v, 1.5);
        EXPECT_LE(std::abs(r.pairing), r.bound * (1 + 1e-12));
    }
}

TEST(DualityPairingBound, PhiAgainstReciprocal) {
    const LatticeBox box(1, 10);
    const std::vector<PF> phis = {PF::power_log(1.0, 1.0), PF::exp_sqrt_log(0.5, 1.0), PF::osc_exponent(1.0, 0.2)};
    for (const auto& f : phis) {
        const auto w = WeightFamily::from_phi(box, ROFunction(f));
        const auto winv = WeightFamily::from_phi(box, ROFunction(PF::reciprocal(f)));
        for (std::uint64_t t = 0; t < 200; ++t) {
            const auto u = random_function(box, 16, 2 * t);
            const auto v = random_function(box, 16, 2 * t + 1);
            EXPECT_LE(std::abs(l2_inner(u, v)), h_phi_norm(u, w) * h_phi_norm(v, winv) * (1 + 1e-12));
        }
    }
}

TEST(DualitySup, Examples) {
    const LatticeBox line(1, 2);
    const auto d0 = LatticeFunction::delta(line, Point{0});
    const auto d1 = LatticeFunction::delta(line, Point{1});

    const auto a = duality_sup(d0, 2.0);
    EXPECT_DOUBLE_EQ(a.sup_value, 1.0);
    EXPECT_LE(sobscale::testing::max_rel_diff(a.maximizer, d0), 1e-15);

    const auto b = duality_sup(d0 + d1, 1.0);
    EXPECT_NEAR(b.sup_value, std::sqrt(3.0), 1e-15);
    const auto expected = (1.0 / std::sqrt(3.0)) * (d0 + 2.0 * d1);
    EXPECT_LE(sobscale::testing::max_rel_diff(b.maximizer, expected), 1e-15);
    EXPECT_NEAR(sobolev_norm(b.maximizer, -1.0), 1.0, 1e-15);

    const Complex c(2.0, 1.0);
    EXPECT_LE(rel_err(duality_sup(c * (d0 + d1), 1.0).sup_value, std::abs(c) * b.sup_value), 1e-15);
    EXPECT_THROW(duality_sup(LatticeFunction(line), 1.0), DegenerateInputError);
}

TEST(DualitySup, ReproducesNorm) {
    const LatticeBox box(2, 4);
    for (double s : {-1.0, 0.5, 1.5}) {
        for (std::uint64_t t = 0; t < 100; ++t) {
            const auto u = random_function(box, 17, t);
            const auto d = duality_sup(u, s);
            EXPECT_LE(rel_err(d.sup_value, sobolev_oracle(u, s)), 1e-12);
            EXPECT_LE(rel_err(sobolev_norm(d.maximizer, -s), 1.0), 1e-12);
            EXPECT_LE(rel_err(l2_inner(u, d.maximizer), Complex(d.sup_value)), 1e-12);
        }
    }
}

TEST(LinfEmbedding, Examples) {
    const auto flat = linf_embedding_constant(WeightFamily::from_phi(LatticeBox(1, 1), ROFunction(PF::constant(1.0))));
    EXPECT_DOUBLE_EQ(flat.constant * flat.constant, 3.0);

    const auto t = linf_embedding_constant(WeightFamily::sobolev(LatticeBox(1, 2000), 1.0));
    // Partial sum of 1/(1+k^2) over |k| <= 2000, plus the closed form of the full series.
    long double partial = 1.0L;
    for (int k = 1; k <= 2000; ++k) partial += 2.0L / (1.0L + static_cast<long double>(k) * k);
    EXPECT_LE(rel_err(t.constant * t.constant, static_cast<double>(partial)), 1e-13);
    const double closed = std::numbers::pi / std::tanh(std::numbers::pi);
    EXPECT_NEAR(t.constant * t.constant, closed, 1e-3);
    ASSERT_FALSE(t.trend.empty());
    EXPECT_EQ(t.trend.back().first, 2000);
    for (std::size_t i = 1; i < t.trend.size(); ++i) EXPECT_GE(t.trend[i].second, t.trend[i - 1].second);
}

TEST(LinfEmbedding, BoundHolds) {
    const LatticeBox line(1, 16);
    const auto w = WeightFamily::sobolev(line, 1.0);
    const double c = linf_embedding_constant(w).constant;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        const auto u = random_function(line, 18, t);
        EXPECT_LE(lp_norm(u, std::numeric_limits<double>::infinity()), c * h_phi_norm(u, w) * (1 + 1e-12));
    }
}

TEST(EmbeddingRatio, Examples) {
    const LatticeBox line(1, 4);
    const auto w1 = WeightFamily::sobolev(line, 1.0);
    const auto w2 = WeightFamily::sobolev(line, 2.0);
    EXPECT_DOUBLE_EQ(embedding_ratio(w1, w2), 1.0);
    EXPECT_DOUBLE_EQ(embedding_ratio(w1, w1), 1.0);
    EXPECT_DOUBLE_EQ(embedding_ratio(w2, w1), std::sqrt(17.0));
}

TEST(EmbeddingRatio, BoundsNormRatio) {
    const LatticeBox box(2, 3);
    const auto w0 = WeightFamily::from_phi(box, ROFunction(PF::power_log(0.5, 1.0)));
    const auto w1 = WeightFamily::sobolev(box, 1.0);
    const double r = embedding_ratio(w0, w1);
    for (std::uint64_t t = 0; t < 100; ++t) {
        const auto u = random_function(box, 19, t);
        EXPECT_LE(h_phi_norm(u, w0), r * h_phi_norm(u, w1) * (1 + 1e-13));
    }
}

TEST(NormBreakdown, ContributionsSumToSquaredNorm) {
    const LatticeBox line(1, 2);
    const auto u = random_function(line, 20);
    const auto w = WeightFamily::sobolev(line, 1.0);
    std::ostringstream out;
    write_norm_breakdown_csv(out, u, w);
    std::istringstream in(out.str());
    std::string line_text;
    std::getline(in, line_text);
    EXPECT_EQ(line_text.rfind("k1,", 0), 0u);
    double total = 0.0;
    int rows = 0;
    while (std::getline(in, line_text)) {
        total += std::stod(line_text.substr(line_text.rfind(',') + 1));
        ++rows;
    }
    EXPECT_EQ(rows, 5);
    EXPECT_LE(rel_err(total, std::pow(h_phi_norm(u, w), 2)), 1e-12);

    const auto summary = norm_summary(u, w);
    EXPECT_DOUBLE_EQ(summary.at("norm").get<double>(), h_phi_norm(u, w));
    EXPECT_EQ(summary.at("box").at("N"), 2);
}
