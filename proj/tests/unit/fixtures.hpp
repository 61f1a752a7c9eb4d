#pragma once

#include <infida/infida.hpp>

namespace fixture {

using namespace infida;

/*
 * Edge node 0 below repository node 1, one task, two unit-size models.
 * Ranking of the single type: (0, m0) cost 20 with L=4, (1, m1) pinned cost 100 with
 * L=10, then two expensive entries nobody deploys.
 */
inline Instance two_node(double edge_budget = 1.0, Count repo_capacity = 10) {
    std::vector<Node> nodes{{0, 1, "hw", edge_budget, 1}, {1, 0, "hw", 2.0, -1}};
    std::vector<Edge> edges{{0, 1, 50.0}};
    Topology topo(nodes, edges);
    std::vector<ModelVariant> models{{0, 0, "edge", 1.0, 0, {}}, {1, 0, "repo", 1.0, 0, {}}};
    std::vector<CatalogEntry> e(4);
    e[0] = {1.0, 20.0, 4, false};            // (0, m0)
    e[1] = {1.0, 500.0, 10, false};          // (0, m1)
    e[2] = {1.0, 500.0, 10, false};          // (1, m0)
    e[3] = {1.0, 50.0, repo_capacity, true};  // (1, m1)
    Catalog cat(models, 2, e);
    std::vector<RequestPath> paths{RequestPath(topo, {0, 1})};
    return Instance(topo, cat, paths, {{0, 0}}, 1.0);
}

inline SlotDemand demand_r10(const Instance& inst) {
    auto s = schedule_slot(inst, inst.catalog().omega(), {10});
    return {{10}, s.l};
}

inline TraceSlot slot_of(const Instance& inst, const std::vector<Count>& r, std::size_t t = 1) {
    TraceSlot s;
    s.slot = t;
    for (std::size_t k = 0; k < r.size(); ++k)
        if (r[k] > 0) s.requests.push_back({inst.types()[k].task, inst.types()[k].path, r[k]});
    return s;
}

}  // namespace fixture
