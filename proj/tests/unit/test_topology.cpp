#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace infida;

namespace {

Topology topology_one() {
    return build_hierarchical_topology({{4, 24, 4096, "gtx_980", 6},
                                        {3, 6, 8192, "gtx_980", 6},
                                        {2, 4, 12288, "gtx_980", 15},
                                        {1, 1, 16384, "titan_rtx", 40},
                                        {0, 1, 1e6, "titan_rtx", 0}});
}

}  // namespace

TEST(Topology, HierarchyOneHas36Nodes) {
    auto t = topology_one();
    EXPECT_EQ(t.size(), 36u);
    EXPECT_EQ(t.base_stations().size(), 24u);
    EXPECT_EQ(t.nodes_in_tier(0).size(), 1u);
    EXPECT_EQ(t.max_tier(), 4);
}

TEST(Topology, HierarchyTwoHasTwoBaseStations) {
    auto t = build_hierarchical_topology(
        {{4, 2, 4096, "gtx_980", 12}, {2, 1, 12288, "gtx_980", 15}, {1, 1, 16384, "titan_rtx", 40}, {0, 1, 1e6, "titan_rtx", 0}});
    EXPECT_EQ(t.size(), 5u);
    EXPECT_EQ(t.base_stations(), (std::vector<NodeId>{0, 1}));
}

TEST(Topology, SingleNode) {
    auto t = build_hierarchical_topology({{0, 1, 100, "hw", 0}});
    EXPECT_EQ(t.size(), 1u);
    EXPECT_EQ(t.path_to_root(0), std::vector<NodeId>{0});
}

TEST(Topology, RejectsTwoRoots) {
    EXPECT_THROW(build_hierarchical_topology({{1, 2, 1, "hw", 1}, {0, 2, 1, "hw", 0}}), ValidationError);
}

TEST(Topology, RejectsDisconnectedGraph) {
    std::vector<Node> n{{0, 0, "hw", 1, -1}, {1, 0, "hw", 1, -1}};
    EXPECT_THROW(Topology(n, {}), ValidationError);
}

TEST(Topology, RejectsNegativeLatency) {
    std::vector<Node> n{{0, 1, "hw", 1, 1}, {1, 0, "hw", 1, -1}};
    EXPECT_THROW(Topology(n, {{0, 1, -1.0}}), ValidationError);
}

TEST(Paths, BaseStationPathReachesRoot) {
    auto t = topology_one();
    auto p = t.path_to_root(t.base_stations().front());
    ASSERT_EQ(p.size(), 5u);
    EXPECT_EQ(t.node(p.back()).tier, 0);
    for (std::size_t j = 0; j < p.size(); ++j) EXPECT_EQ(t.node(p[j]).tier, 4 - static_cast<int>(j));
}

TEST(Paths, PrefixLatency) {
    auto t = topology_one();
    RequestPath p(t, t.path_to_root(t.base_stations().front()));
    EXPECT_DOUBLE_EQ(p.prefix_latency(1), 0.0);
    EXPECT_DOUBLE_EQ(p.prefix_latency(5), 67.0);
    EXPECT_DOUBLE_EQ(p.prefix_latency(3), 12.0);
}

TEST(Paths, ThreeNodePrefix) {
    std::vector<Node> n{{0, 2, "hw", 1, 1}, {1, 1, "hw", 1, 2}, {2, 0, "hw", 1, -1}};
    Topology t(n, {{0, 1, 6}, {1, 2, 15}});
    RequestPath p(t, {0, 1, 2});
    EXPECT_DOUBLE_EQ(p.prefix_latency(3), 21.0);
    EXPECT_DOUBLE_EQ(p.prefix_latency(2), 6.0);
}

TEST(Paths, RejectsMissingEdgeAndRepeats) {
    std::vector<Node> n{{0, 2, "hw", 1, 1}, {1, 1, "hw", 1, 2}, {2, 0, "hw", 1, -1}};
    Topology t(n, {{0, 1, 6}, {1, 2, 15}});
    EXPECT_THROW(RequestPath(t, {0, 2}), ValidationError);
    EXPECT_THROW(RequestPath(t, {0, 1, 0}), ValidationError);
}

TEST(Paths, RepositoryOriginHasLengthOne) {
    auto inst = fixture::two_node();
    auto p = serving_path(inst.topology(), inst.catalog(), 1, 0);
    EXPECT_EQ(p.size(), 1u);
    EXPECT_THROW(serving_path(inst.topology(), inst.catalog(), 0, 7), ValidationError);
}

TEST(Topology, JsonRoundTrip) {
    auto t = topology_one();
    auto back = topology_from_json(topology_to_json(t));
    ASSERT_EQ(back.size(), t.size());
    for (std::size_t v = 0; v < t.size(); ++v) {
        EXPECT_EQ(back.node(static_cast<NodeId>(v)).parent, t.node(static_cast<NodeId>(v)).parent);
        EXPECT_EQ(back.node(static_cast<NodeId>(v)).budget_mb, t.node(static_cast<NodeId>(v)).budget_mb);
    }
    EXPECT_EQ(back.edges().size(), t.edges().size());
}
