#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace infida;

namespace {

// Projection oracle: bisection on the multiplier of sum s min(1, m h) = b, independent of the sorted scan.
std::vector<double> projection_oracle(const std::vector<double>& h, const std::vector<double>& s, double b) {
    double total = 0.0;
    for (double v : s) total += v;
    if (total <= b) return std::vector<double>(h.size(), 1.0);
    auto mass = [&](double m) {
        double t = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k) t += s[k] * std::min(1.0, m * h[k]);
        return t;
    };
    double lo = 0.0, hi = 1.0;
    while (mass(hi) < b) hi *= 2.0;
    for (int it = 0; it < 300; ++it) {
        double mid = 0.5 * (lo + hi);
        (mass(mid) < b ? lo : hi) = mid;
    }
    std::vector<double> y(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) y[k] = std::min(1.0, hi * h[k]);
    return y;
}

}  // namespace

TEST(Mirror, ZeroStepIsIdentity) {
    std::vector<double> y{0.2, 0.5, 0.3}, s{1, 2, 3}, g{5, -1, 7};
    auto h = mirror_step(y, s, g, 0.0, {});
    for (std::size_t k = 0; k < y.size(); ++k) EXPECT_NEAR(h[k], y[k], 1e-15);
    auto p = bregman_project(h, s, 0.2 + 1.0 + 0.9);
    for (std::size_t k = 0; k < y.size(); ++k) EXPECT_NEAR(p[k], y[k], 1e-12);
}

TEST(Mirror, DualMapRoundTrip) {
    double y = std::exp(-1.0);
    EXPECT_NEAR(dual_map(y, 1.0), 0.0, 1e-15);
    EXPECT_NEAR(inverse_dual_map(0.0, 1.0), y, 1e-15);
    auto h = mirror_step({y}, {1.0}, {1.0}, 1.0, {});
    EXPECT_NEAR(h[0], 1.0, 1e-15);
}

TEST(Mirror, PinnedCoordinatesCopied) {
    auto h = mirror_step({1.0, 0.3}, {1, 1}, {100, 0}, 1.0, {1, 0});
    EXPECT_EQ(h[0], 1.0);
    EXPECT_NEAR(h[1], 0.3, 1e-15);
}

TEST(Mirror, OverflowClamped) {
    auto h = mirror_step({0.5}, {1.0}, {1e6}, 1.0, {});
    EXPECT_TRUE(std::isfinite(h[0]));
    EXPECT_EQ(h[0], max_primal);
    auto l = mirror_step({0.5}, {1.0}, {-1e6}, 1.0, {}, 1e-12);
    EXPECT_EQ(l[0], 1e-12);
}

TEST(Projection, TwoEqualCoordinates) {
    ProjectionInfo info;
    auto y = bregman_project({0.8, 0.8}, {1, 1}, 1.0, {}, 0.0, &info);
    EXPECT_NEAR(y[0], 0.5, 1e-15);
    EXPECT_NEAR(y[1], 0.5, 1e-15);
    EXPECT_NEAR(info.multiplier, 0.625, 1e-15);
    EXPECT_EQ(info.scaled, 2u);
}

TEST(Projection, OneCapped) {
    ProjectionInfo info;
    auto y = bregman_project({0.1, 2.0}, {1, 1}, 1.5, {}, 0.0, &info);
    EXPECT_NEAR(y[0], 0.5, 1e-15);
    EXPECT_EQ(y[1], 1.0);
    EXPECT_NEAR(info.multiplier, 5.0, 1e-12);
    EXPECT_EQ(info.scaled, 1u);
}

TEST(Projection, IdempotentOnFeasiblePoint) {
    std::vector<double> y{0.25, 0.5, 0.125}, s{2, 1, 4};
    auto p = bregman_project(y, s, 0.5 + 0.5 + 0.5);
    for (std::size_t k = 0; k < y.size(); ++k) EXPECT_NEAR(p[k], y[k], 1e-15);
}

TEST(Projection, CornerAndErrors) {
    ProjectionInfo info;
    auto y = bregman_project({0.1, 0.2}, {1, 1}, 5.0, {}, 0.0, &info);
    EXPECT_TRUE(info.corner);
    EXPECT_EQ(y, (std::vector<double>{1.0, 1.0}));
    EXPECT_THROW(bregman_project({0.1, 0.2}, {1, 1}, 0.0), InfeasibleError);
    EXPECT_THROW(bregman_project({0.1, 0.2}, {3, 1}, 1.0, {1, 0}), InfeasibleError);
    EXPECT_THROW(bregman_project({0.0, 0.2}, {1, 1}, 1.0), ValidationError);
}

TEST(Projection, PinnedDeductedFromBudget) {
    auto y = bregman_project({1.0, 0.8, 0.8}, {1, 1, 1}, 2.0, {1, 0, 0});
    EXPECT_EQ(y[0], 1.0);
    EXPECT_NEAR(y[1], 0.5, 1e-15);
    EXPECT_NEAR(y[2], 0.5, 1e-15);
}

TEST(Projection, MatchesBisectionOracle) {
    std::mt19937_64 rng(2);
    std::lognormal_distribution<double> ln(0.0, 2.0);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n = 1 + rng() % 40;
        std::vector<double> h(n), s(n);
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            h[k] = ln(rng);
            s[k] = u(rng);
            total += s[k];
        }
        double b = std::uniform_real_distribution<double>(0.05, 1.0)(rng) * total;
        auto y = bregman_project(h, s, b);
        auto o = projection_oracle(h, s, b);
        for (std::size_t k = 0; k < n; ++k) ASSERT_NEAR(y[k], o[k], 1e-9);
    }
}

TEST(Projection, EpsilonFloorKeepsBudget) {
    std::vector<double> h{1e-30, 1.0, 1.0}, s{1, 1, 1};
    auto y = bregman_project(h, s, 1.0, {}, 1e-6);
    EXPECT_GE(y[0], 1e-6);
    EXPECT_NEAR(y[0] + y[1] + y[2], 1.0, 1e-12);
}

TEST(Mirror, BregmanDivergenceProperties) {
    std::vector<double> y{0.2, 0.7}, s{1.5, 0.5};
    EXPECT_NEAR(bregman_divergence(y, y, s), 0.0, 1e-16);
    EXPECT_GT(bregman_divergence(y, {0.3, 0.6}, s), 0.0);
}
