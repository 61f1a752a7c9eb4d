#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace infida;

TEST(Structural, RandomInstancesPass) {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 20; ++i) {
        auto inst = random_instance(rng);
        auto rep = structural_checks(inst, 50, rng);
        for (const auto& r : rep.results) EXPECT_TRUE(r.passed()) << r.name << ": " << r.counterexample;
    }
}

TEST(Structural, BrokenGainIsCaught) {
    std::mt19937_64 rng(102);
    GainFunctions broken;
    // drops the last telescoping term
    broken.gain_compact = [](const Instance& inst, const SlotDemand& d, const Allocation& y) {
        Allocation w = inst.catalog().omega();
        double g = 0.0;
        for (std::size_t rho = 0; rho < inst.num_types(); ++rho) {
            const auto& rk = inst.ranking(rho);
            double r = static_cast<double>(d.r[rho]), sy = 0.0, sw = 0.0;
            for (std::size_t k = 0; k + 2 < rk.size(); ++k) {
                sy += y[rk.entries[k].index] * d.l[rho][k];
                sw += w[rk.entries[k].index] * d.l[rho][k];
                g += (rk.entries[k + 1].cost - rk.entries[k].cost) * (std::min(r, sy) - std::min(r, sw));
            }
        }
        return g;
    };
    std::size_t violations = 0;
    for (int i = 0; i < 20; ++i) {
        auto inst = random_instance(rng);
        auto rep = structural_checks(inst, 30, rng, broken);
        for (const auto& r : rep.results)
            if (r.name == "gain-equivalence") violations += r.violations;
    }
    EXPECT_GT(violations, 0u);
}

TEST(Structural, ExhaustiveOnFourCoordinates) {
    std::mt19937_64 rng(103);
    RandomInstanceOptions o;
    o.min_nodes = o.max_nodes = 2;
    o.min_models = o.max_models = 2;
    o.max_tasks = 1;
    int checked = 0;
    for (int i = 0; i < 20; ++i) {
        auto inst = random_instance(rng, o);
        ASSERT_EQ(inst.dim(), 4u);
        auto d = random_demand(inst, rng, 20);
        CheckResult sub{"submodularity"}, mono{"monotonicity"};
        check_submodular(inst, d, [](const Instance& a, const SlotDemand& b, const Allocation& c) { return gain(a, b, c); },
                         1e-9, sub, mono);
        EXPECT_TRUE(sub.passed()) << sub.counterexample;
        EXPECT_TRUE(mono.passed()) << mono.counterexample;
        EXPECT_EQ(mono.trials, 3u * 4u);  // 3 free coordinates: 8 sets, each missing element counted
        checked += sub.trials > 0;
    }
    EXPECT_EQ(checked, 20);
}

TEST(Structural, RandomInstanceShape) {
    std::mt19937_64 rng(104);
    RandomInstanceOptions o;
    o.max_coordinates = 8;
    for (int i = 0; i < 50; ++i) {
        auto inst = random_instance(rng, o);
        EXPECT_LE(inst.dim(), 8u);
        EXPECT_GE(inst.num_types(), 1u);
        auto d = random_demand(inst, rng, 20);
        EXPECT_NO_THROW(check_demand(inst, d));
        EXPECT_NO_THROW(check_allocation(inst, random_simplex_point(inst, rng)));
    }
}
