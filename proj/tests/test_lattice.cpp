#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "sobscale/error.hpp"
#include "sobscale/lattice.hpp"
#include "support.hpp"

using namespace sobscale;
using sobscale::testing::random_function;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST(LatticeBox, CardinalityAndEnumeration) {
    for (int n = 1; n <= 3; ++n) {
        for (int radius : {1, 2, 3}) {
            const LatticeBox box(n, radius);
            std::size_t expected = 1;
            for (int j = 0; j < n; ++j) expected *= static_cast<std::size_t>(2 * radius + 1);
            ASSERT_EQ(box.size(), expected);
            for (std::size_t i = 0; i < box.size(); ++i) ASSERT_EQ(box.index(box.point(i)), i);
        }
    }
}

TEST(LatticeBox, LexicographicOrder) {
    const LatticeBox box(2, 1);
    EXPECT_EQ(box.point(0), (Point{-1, -1}));
    EXPECT_EQ(box.point(1), (Point{-1, 0}));
    EXPECT_EQ(box.point(3), (Point{0, -1}));
    EXPECT_EQ(box.point(8), (Point{1, 1}));
    EXPECT_EQ(box.point(box.origin()), (Point{0, 0}));
}

TEST(LatticeBox, RejectsBadShapes) {
    EXPECT_THROW(LatticeBox(0, 2), DimensionError);
    const LatticeBox box(1, 2);
    EXPECT_FALSE(box.contains(Point{3}));
    EXPECT_FALSE(box.find(Point{-3}).has_value());
    EXPECT_THROW(box.index(Point{3}), ShapeError);
}

TEST(JapaneseBracket, Examples) {
    EXPECT_DOUBLE_EQ(japanese_bracket(Point{0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(japanese_bracket(Point{3, 4}), std::sqrt(26.0));
    EXPECT_DOUBLE_EQ(japanese_bracket(Point{1}), std::sqrt(2.0));
    EXPECT_THROW(japanese_bracket(Point{}), DimensionError);
}

TEST(LpNorm, Examples) {
    const LatticeBox line(1, 1);
    EXPECT_DOUBLE_EQ(lp_norm(LatticeFunction::delta(line, Point{0}), 2.0), 1.0);
    EXPECT_DOUBLE_EQ(lp_norm(LatticeFunction(line, {1.0, 1.0, 1.0}), 1.0), 3.0);
    EXPECT_DOUBLE_EQ(lp_norm(LatticeFunction(line, {1.0, -2.0, 2.0}), kInf), 2.0);
    EXPECT_THROW(lp_norm(LatticeFunction(line), 3.0), ParameterError);
}

TEST(L2Inner, Sesquilinearity) {
    const LatticeBox box(2, 2);
    const auto d0 = LatticeFunction::delta(box, Point{0, 0});
    const auto de1 = LatticeFunction::delta(box, Point{1, 0});
    const Complex i(0.0, 1.0);
    EXPECT_EQ(l2_inner(d0, d0), Complex(1.0));
    EXPECT_EQ(l2_inner(d0, de1), Complex(0.0));
    EXPECT_EQ(l2_inner(i * d0, d0), i);
    EXPECT_EQ(l2_inner(d0, i * d0), -i);
    EXPECT_THROW(l2_inner(d0, LatticeFunction(LatticeBox(2, 3))), ShapeError);
}

TEST(L2Inner, NormConsistency) {
    const LatticeBox box(2, 4);
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto u = random_function(box, 11, t);
        const double n2 = lp_norm(u, 2.0);
        const Complex ip = l2_inner(u, u);
        EXPECT_NEAR(n2 * n2, ip.real(), 1e-12 * n2 * n2);
        EXPECT_LE(std::abs(ip.imag()), 1e-14 * n2 * n2);
    }
}

TEST(LpNorm, TriangleAndHomogeneity) {
    const LatticeBox box(1, 10);
    const Complex c(2.0, -1.5);
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto u = random_function(box, 3, 2 * t);
        const auto v = random_function(box, 3, 2 * t + 1);
        for (double p : {1.0, 2.0, kInf}) {
            EXPECT_LE(lp_norm(u + v, p), (lp_norm(u, p) + lp_norm(v, p)) * (1 + 1e-14));
            EXPECT_NEAR(lp_norm(c * u, p), std::abs(c) * lp_norm(u, p), 1e-13 * lp_norm(c * u, p));
        }
    }
}

TEST(ForwardDifference, LinearFunctionHasUnitSlope) {
    const LatticeBox line(1, 5);
    const auto u = LatticeFunction::from(line, [](const Point& k) { return Complex(k[0]); });
    const auto d = forward_difference(u, {1});
    for (std::size_t i = 0; i + 1 < line.size(); ++i) EXPECT_EQ(d[i], Complex(1.0));
    // The last point reads the zero extension.
    EXPECT_EQ(d[line.size() - 1], Complex(-5.0));
}

TEST(ForwardDifference, ZeroOrderIsIdentity) {
    const LatticeBox box(2, 3);
    const auto u = random_function(box, 5);
    const auto d = forward_difference(u, {0, 0});
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(d[i], u[i]);
}

TEST(ForwardDifference, DeltaAtOrigin) {
    const LatticeBox line(1, 3);
    const auto d = forward_difference(LatticeFunction::delta(line, Point{0}), {1});
    for (std::size_t i = 0; i < line.size(); ++i) {
        const int k = line.point(i)[0];
        const Complex expected = k == -1 ? 1.0 : (k == 0 ? -1.0 : 0.0);
        EXPECT_EQ(d[i], expected) << "k = " << k;
    }
}

TEST(ForwardDifference, PartialDifferencesCommute) {
    const LatticeBox box(3, 3);
    const auto u = random_function(box, 8);
    const auto a = forward_difference(forward_difference(u, {1, 0, 0}), {0, 0, 1});
    const auto b = forward_difference(forward_difference(u, {0, 0, 1}), {1, 0, 0});
    const auto c = forward_difference(u, {1, 0, 1});
    for (std::size_t i = 0; i < u.size(); ++i) {
        EXPECT_LE(std::abs(a[i] - b[i]), 1e-14);
        EXPECT_LE(std::abs(a[i] - c[i]), 1e-14);
    }
}

TEST(ForwardDifference, OneNormBoundTwo) {
    const LatticeBox box(2, 5);
    for (std::uint64_t t = 0; t < 30; ++t) {
        const auto u = random_function(box, 21, t);
        EXPECT_LE(lp_norm(forward_difference(u, {0, 1}), 1.0), 2.0 * lp_norm(u, 1.0) * (1 + 1e-14));
    }
}

TEST(SchwartzSeminorm, Examples) {
    const LatticeBox line(1, 4);
    const auto d0 = LatticeFunction::delta(line, Point{0});
    EXPECT_DOUBLE_EQ(schwartz_seminorm(d0, {0}, {0}), 1.0);
    EXPECT_DOUBLE_EQ(schwartz_seminorm(d0, {1}, {0}), 0.0);
    const auto u = LatticeFunction::from(line, [](const Point& k) { return Complex(1.0 / (1.0 + k[0] * k[0])); });
    // Brute-force scan of |k| / (1 + k^2) over the box.
    double expected = 0.0;
    for (int k = -4; k <= 4; ++k) expected = std::max(expected, std::abs(k) / (1.0 + k * k));
    EXPECT_DOUBLE_EQ(expected, 0.5);
    EXPECT_NEAR(schwartz_seminorm(u, {1}, {0}), expected, 1e-15);
}

TEST(PairwiseSum, MatchesExactSumOfIntegers) {
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    EXPECT_EQ(pairwise_sum(v), 999.0 * 1000.0 / 2.0);
    EXPECT_EQ(pairwise_sum(std::span<const double>()), 0.0);
}

TEST(MultiIndices, GradedEnumeration) {
    const auto all = multi_indices_up_to(2, 2);
    ASSERT_EQ(all.size(), 6u);
    EXPECT_EQ(all[0], (MultiIndex{0, 0}));
    EXPECT_EQ(all[1], (MultiIndex{1, 0}));
    EXPECT_EQ(all[2], (MultiIndex{0, 1}));
    EXPECT_EQ(all[5], (MultiIndex{0, 2}));
}

TEST(LatticeSerialization, JsonRoundTrip) {
    const LatticeBox box(2, 2);
    const auto u = random_function(box, 99);
    const auto j = to_json(u);
    EXPECT_EQ(j.at("n"), 2);
    EXPECT_EQ(j.at("N"), 2);
    const auto back = lattice_function_from_json(nlohmann::json::parse(j.dump()));
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(back[i], u[i]);
}

TEST(LatticeSerialization, CsvRows) {
    const LatticeBox line(1, 1);
    std::ostringstream out;
    write_csv(out, LatticeFunction(line, {Complex(1, 2), 0.5, Complex(0, -1)}));
    EXPECT_EQ(out.str(), "k1,re,im\n-1,1,2\n0,0.5,0\n1,0,-1\n");
}
