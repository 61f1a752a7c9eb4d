#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace infida;

namespace {

Allocation with_edge(const Instance& inst, double v) {
    auto x = inst.catalog().omega();
    x[inst.index(0, 0)] = v;
    return x;
}

// Independent cost: walk the ranking, take z = y l until r is covered.
double oracle_cost(const Instance& inst, const SlotDemand& d, const Allocation& y) {
    double c = 0.0;
    for (std::size_t rho = 0; rho < inst.num_types(); ++rho) {
        double left = static_cast<double>(d.r[rho]);
        const auto& rk = inst.ranking(rho);
        for (std::size_t k = 0; k < rk.size() && left > 0; ++k) {
            double z = y[rk.entries[k].index] * d.l[rho][k];
            double take = std::min(z, left);
            c += take * rk.entries[k].cost;
            left -= take;
        }
    }
    return c;
}

}  // namespace

TEST(Schedule, HandWaterFill) {
    auto inst = fixture::two_node();
    ASSERT_EQ(inst.ranking(0).entries[0].index, inst.index(0, 0));
    ASSERT_DOUBLE_EQ(inst.ranking(0).entries[0].cost, 20.0);
    ASSERT_DOUBLE_EQ(inst.ranking(0).entries[1].cost, 100.0);
    auto s = schedule_slot(inst, with_edge(inst, 1.0), {10});
    EXPECT_DOUBLE_EQ(s.load[0][0], 4.0);
    EXPECT_DOUBLE_EQ(s.load[0][1], 6.0);
    EXPECT_DOUBLE_EQ(s.l[0][0], 4.0);
    EXPECT_DOUBLE_EQ(s.l[0][1], 10.0);
}

TEST(Schedule, ZeroBatch) {
    auto inst = fixture::two_node();
    auto s = schedule_slot(inst, with_edge(inst, 1.0), {0});
    for (double v : s.load[0]) EXPECT_EQ(v, 0.0);
    for (double v : s.l[0]) EXPECT_EQ(v, 0.0);
}

TEST(Schedule, SharedModelGoesToLowerType) {
    std::vector<Node> nodes{{0, 1, "hw", 1, 2}, {1, 1, "hw", 1, 2}, {2, 0, "hw", 2, -1}};
    Topology topo(nodes, {{0, 2, 10}, {1, 2, 10}});
    std::vector<ModelVariant> models{{0, 0, "shared", 1.0, 0, {}}, {1, 0, "repo", 1.0, 0, {}}};
    std::vector<CatalogEntry> e(6, {1.0, 500.0, 5, false});
    e[2 * 2 + 0] = {1.0, 1.0, 5, false};   // shared model at node 2, cheap
    e[2 * 2 + 1] = {1.0, 50.0, 20, true};  // repository
    Catalog cat(models, 3, e);
    Instance inst(topo, cat, {RequestPath(topo, {0, 2}), RequestPath(topo, {1, 2})}, {{0, 0}, {0, 1}}, 1.0);
    auto x = cat.omega();
    x[inst.index(2, 0)] = 1.0;
    auto s = schedule_slot(inst, x, {5, 5});
    int k0 = inst.ranking(0).rank_of[inst.index(2, 0)];
    int k1 = inst.ranking(1).rank_of[inst.index(2, 0)];
    EXPECT_DOUBLE_EQ(s.load[0][static_cast<std::size_t>(k0)], 5.0);
    EXPECT_DOUBLE_EQ(s.load[1][static_cast<std::size_t>(k1)], 0.0);
    EXPECT_DOUBLE_EQ(s.l[1][static_cast<std::size_t>(k1)], 0.0);
}

TEST(Schedule, RejectsInfeasibleAndFractional) {
    auto inst = fixture::two_node(1.0, 5);
    EXPECT_THROW(schedule_slot(inst, inst.catalog().omega(), {10}), InfeasibleError);
    auto inst2 = fixture::two_node();
    EXPECT_THROW(schedule_slot(inst2, with_edge(inst2, 0.5), {10}), InfeasibleError);
    EXPECT_NO_THROW(schedule_slot(inst2, with_edge(inst2, 0.5), {10}, false));
    auto bad = inst2.catalog().omega();
    bad[inst2.index(1, 1)] = 0.0;
    EXPECT_THROW(schedule_slot(inst2, bad, {1}), InfeasibleError);
}

TEST(Cost, HandValues) {
    auto inst = fixture::two_node();
    auto d = fixture::demand_r10(inst);
    EXPECT_DOUBLE_EQ(aggregate_cost(inst, d, with_edge(inst, 1.0)), 680.0);
    EXPECT_DOUBLE_EQ(aggregate_cost(inst, d, inst.catalog().omega()), 1000.0);
    SlotDemand zero{{0}, {{0, 0, 0, 0}}};
    EXPECT_DOUBLE_EQ(aggregate_cost(inst, zero, with_edge(inst, 1.0)), 0.0);
}

TEST(Gain, HandValues) {
    auto inst = fixture::two_node();
    auto d = fixture::demand_r10(inst);
    EXPECT_DOUBLE_EQ(gain(inst, d, with_edge(inst, 1.0)), 320.0);
    EXPECT_DOUBLE_EQ(gain_compact(inst, d, with_edge(inst, 1.0)), 320.0);
    EXPECT_DOUBLE_EQ(gain(inst, d, inst.catalog().omega()), 0.0);
    EXPECT_DOUBLE_EQ(gain_compact(inst, d, with_edge(inst, 0.5)), 160.0);
    EXPECT_DOUBLE_EQ(gain(inst, d, with_edge(inst, 0.5)), 160.0);
}

TEST(Gain, BoundingFunction) {
    auto inst = fixture::two_node();
    auto d = fixture::demand_r10(inst);
    EXPECT_DOUBLE_EQ(bounding_function(inst, d, with_edge(inst, 0.5)), 160.0);
    EXPECT_DOUBLE_EQ(bounding_function(inst, d, inst.catalog().omega()), 0.0);
    EXPECT_DOUBLE_EQ(bounding_function(inst, d, with_edge(inst, 1.0)), gain(inst, d, with_edge(inst, 1.0)));
}

TEST(Gain, MatchesIndependentCostOracle) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        auto inst = random_instance(rng);
        auto d = random_demand(inst, rng, 20);
        auto y = random_box_point(inst, rng, trial % 2 == 0);
        double ref = oracle_cost(inst, d, inst.catalog().omega()) - oracle_cost(inst, d, y);
        double g = gain(inst, d, y);
        ASSERT_NEAR(g, ref, 1e-9 * std::max(1.0, std::abs(ref)));
        ASSERT_NEAR(gain_compact(inst, d, y), ref, 1e-9 * std::max(1.0, std::abs(ref)));
    }
}

TEST(Gain, CompactNeedsRepositoryCoverage) {
    auto inst = fixture::two_node();
    SlotDemand d{{10}, {{4, 5, 10, 10}}};
    EXPECT_THROW(gain_compact(inst, d, with_edge(inst, 1.0)), InfeasibleError);
}

TEST(Gain, BetterUpstreamAlternatives) {
    auto inst = fixture::two_node();
    auto alt = better_upstream_alternatives(inst, 0, inst.catalog().omega());
    ASSERT_EQ(alt.size(), 4u);
    EXPECT_EQ(alt[0], -1);
    EXPECT_EQ(alt[1], 0);
}
