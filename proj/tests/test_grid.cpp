#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gfrag/grid.hpp"
#include "gfrag/support.hpp"

using namespace gfrag;

TEST(Grid, NodesAndWeights) {
    const auto x = uniform_nodes(2.0, 4);
    ASSERT_EQ(x.size(), 5u);
    EXPECT_DOUBLE_EQ(x.back(), 2.0);
    const auto w = trapezoid_weights(x);
    EXPECT_DOUBLE_EQ(w.front(), 0.25);
    EXPECT_DOUBLE_EQ(w[2], 0.5);
    const auto c = midpoint_nodes(1.0, 4);
    EXPECT_DOUBLE_EQ(c.front(), 0.125);
    EXPECT_DOUBLE_EQ(c.back(), 0.875);
}

TEST(Grid, RejectsUnsortedNodes) {
    EXPECT_THROW(GridFunction({0.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), InvalidInput);
    EXPECT_THROW(GridFunction({0.0, 1.0}, {1.0}), InvalidInput);
}

TEST(Grid, Interpolation) {
    const GridFunction f({0.0, 1.0, 3.0}, {1.0, 3.0, -1.0});
    EXPECT_DOUBLE_EQ(f(0.5), 2.0);
    EXPECT_DOUBLE_EQ(f(2.0), 1.0);
    EXPECT_DOUBLE_EQ(f(3.5), 0.0);
    const auto g = resample_extended(f, {0.0, 4.0});
    EXPECT_DOUBLE_EQ(g.values[1], -1.0);
}

TEST(XmNorm, ExponentialOnDenseGrid) {
    // ∫(1 + x²)e^{-x} = 1 + Γ(3) = 3
    const auto f = GridFunction::sample(uniform_nodes(50.0, 50000), [](double x) { return std::exp(-x); }, 2.0);
    EXPECT_NEAR(xm_norm(f), 3.0, 1e-6);
}

TEST(XmNorm, ExponentialTailRuleRecoversTruncatedMass) {
    const auto f = GridFunction::sample(uniform_nodes(5.0, 5000), [](double x) { return std::exp(-x); }, 2.0);
    EXPECT_LT(xm_norm(f), 2.9);
    EXPECT_NEAR(xm_norm(f, TailRule::exponential), 3.0, 1e-5);
}

TEST(XmNorm, IndicatorOfUnitInterval) {
    std::vector<double> x = uniform_nodes(1.0, 10);
    const GridFunction f(x, std::vector<double>(x.size(), 1.0), 1.0);
    EXPECT_NEAR(xm_norm(f), 1.5, 1e-14);
}

TEST(XmNorm, ZeroAndDegenerate) {
    const GridFunction z(uniform_nodes(1.0, 8), std::vector<double>(9, 0.0));
    EXPECT_EQ(xm_norm(z), 0.0);
    EXPECT_THROW(xm_norm(GridFunction()), InvalidInput);
}

TEST(XmNorm, HomogeneityAndTriangleInequality) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> scale(-5.0, 5.0);
    const auto x = uniform_nodes(10.0, 200);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(x.size()), b(x.size());
        for (auto& v : a) v = n01(rng);
        for (auto& v : b) v = n01(rng);
        const GridFunction f(x, a, 2.0), g(x, b, 2.0);
        const double c = scale(rng);
        EXPECT_NEAR(xm_norm(c * f), std::abs(c) * xm_norm(f), 1e-12 * xm_norm(f) * std::abs(c) + 1e-300);
        EXPECT_LE(xm_norm(f + g), (xm_norm(f) + xm_norm(g)) * (1.0 + 1e-14));
    }
}

TEST(Pairing, TrapezoidIsExactForLinearProducts) {
    const auto x = uniform_nodes(2.0, 4);
    const auto f = GridFunction::sample(x, [](double s) { return 1.0 + s; });
    const auto one = GridFunction::sample(x, [](double) { return 1.0; });
    EXPECT_NEAR(pairing(one, f), 4.0, 1e-14);
    EXPECT_NEAR(integrate(f), 4.0, 1e-14);
    EXPECT_NEAR(l1_norm(-1.0 * f), 4.0, 1e-14);
}

TEST(Support, IntervalUnionMembership) {
    const IntervalUnion u({{0.0, 1.0}, {2.0, infinity}});
    EXPECT_TRUE(u.contains(0.5));
    EXPECT_FALSE(u.contains(1.5));
    EXPECT_TRUE(u.contains(1e9));
    EXPECT_THROW(IntervalUnion(std::vector<Interval>{{1.0, 0.5}}), InvalidInput);
}
