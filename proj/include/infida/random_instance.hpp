#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <vector>

#include "instance.hpp"
#include "mirror.hpp"
#include "policy.hpp"
#include "serving.hpp"

namespace infida {

/** \brief Shape limits for small random instances used by property checks. */
struct RandomInstanceOptions {
    int min_nodes = 1;
    int max_nodes = 5;
    int min_models = 2;    ///< total over tasks, including one repository model per task
    int max_models = 6;
    int max_tasks = 2;
    int max_types_per_task = 2;
    int max_coordinates = 0;  ///< bound on |V x M| when positive
    Count max_batch = 20;
    Count max_capacity = 12;
    double max_latency = 20.0;
    double max_delay = 30.0;
    double max_size = 5.0;
    bool integer_sizes = false;
};

/**
 * \brief Random tree rooted at the last node (the repository). Every task has one pinned
 * model at the root with capacity covering the largest possible total batch, a few
 * request types, and random per-node delays so upstream models can be cheaper than
 * downstream ones.
 */
template <class Rng>
Instance random_instance(Rng& rng, const RandomInstanceOptions& opt = {}) {
    auto uni_int = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

    int V = uni_int(opt.min_nodes, opt.max_nodes);
    int tasks = uni_int(1, std::max(1, opt.max_tasks));
    int M = uni_int(std::max(opt.min_models, tasks), std::max(opt.max_models, tasks));
    if (opt.max_coordinates > 0) {
        while (V > 1 && V * M > opt.max_coordinates) --V;
        while (M > tasks && V * M > opt.max_coordinates) --M;
    }

    // Tree: node V-1 is the root; each other node's parent has a larger id.
    std::vector<Node> nodes(static_cast<std::size_t>(V));
    std::vector<Edge> edges;
    std::vector<int> depth(static_cast<std::size_t>(V), 0);
    for (int v = V - 1; v >= 0; --v) {
        auto& n = nodes[static_cast<std::size_t>(v)];
        n.id = v;
        n.hardware = "hw";
        if (v < V - 1) {
            n.parent = uni_int(v + 1, V - 1);
            depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(n.parent)] + 1;
            edges.push_back({v, n.parent, std::round(uni(0.0, opt.max_latency) * 4.0) / 4.0});
        }
    }
    for (int v = 0; v < V; ++v) nodes[static_cast<std::size_t>(v)].tier = depth[static_cast<std::size_t>(v)];

    std::vector<ModelVariant> models(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        auto& mv = models[static_cast<std::size_t>(m)];
        mv.id = m;
        mv.task = m < tasks ? m : uni_int(0, tasks - 1);
        mv.accuracy = uni(0.2, 0.9);
        mv.name = "m" + std::to_string(m);
    }
    std::stable_sort(models.begin(), models.end(), [](const ModelVariant& a, const ModelVariant& b) { return a.task < b.task; });
    for (int m = 0; m < M; ++m) models[static_cast<std::size_t>(m)].id = m;

    // Types first, so the repository capacity can cover the largest total batch of a task.
    std::vector<int> per_task_types(static_cast<std::size_t>(tasks), 0);
    std::vector<RequestType> types;
    std::vector<RequestPath> paths;
    Topology topo_tmp(nodes, edges);
    for (int v = 0; v < V; ++v) paths.emplace_back(topo_tmp, topo_tmp.path_to_root(v));
    for (int i = 0; i < tasks; ++i) {
        int n = uni_int(1, std::max(1, std::min(opt.max_types_per_task, V)));
        std::vector<int> origins(static_cast<std::size_t>(V));
        for (int v = 0; v < V; ++v) origins[static_cast<std::size_t>(v)] = v;
        std::shuffle(origins.begin(), origins.end(), rng);
        for (int k = 0; k < n; ++k) types.push_back({i, origins[static_cast<std::size_t>(k)]});
        per_task_types[static_cast<std::size_t>(i)] = n;
    }

    std::vector<CatalogEntry> entries(static_cast<std::size_t>(V * M));
    std::vector<char> repo_done(static_cast<std::size_t>(tasks), 0);
    for (int m = 0; m < M; ++m) {
        const auto& mv = models[static_cast<std::size_t>(m)];
        bool pin = !repo_done[static_cast<std::size_t>(mv.task)];
        repo_done[static_cast<std::size_t>(mv.task)] = 1;
        for (int v = 0; v < V; ++v) {
            auto& e = entries[static_cast<std::size_t>(v * M + m)];
            double sz = uni(0.5, opt.max_size);
            e.size_mb = opt.integer_sizes ? std::max(1.0, std::round(sz)) : sz;
            e.delay_ms = uni(0.0, opt.max_delay);
            e.capacity = uni_int(1, static_cast<int>(opt.max_capacity));
            if (pin && v == V - 1) {
                e.pinned = true;
                e.capacity = opt.max_batch * per_task_types[static_cast<std::size_t>(mv.task)];
            }
        }
    }
    Catalog cat(models, static_cast<std::size_t>(V), entries);
    for (int v = 0; v < V; ++v) {
        double total = cat.total_size(v), pinned = cat.pinned_size(v);
        nodes[static_cast<std::size_t>(v)].budget_mb = v == V - 1 ? total : pinned + uni(0.0, 0.8) * (total - pinned);
    }
    Topology topo(nodes, edges);
    return Instance(topo, cat, paths, types, uni(0.0, 2.0));
}

/**
 * \brief Random slot: batches up to max_batch, capacities within min(L, r), and every
 * pinned entry offering the whole batch.
 */
template <class Rng>
SlotDemand random_demand(const Instance& inst, Rng& rng, Count max_batch, double zero_prob = 0.1) {
    SlotDemand d;
    d.r.resize(inst.num_types());
    d.l.resize(inst.num_types());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t rho = 0; rho < inst.num_types(); ++rho) {
        Count r = u(rng) < zero_prob ? 0 : std::uniform_int_distribution<Count>(1, std::max<Count>(1, max_batch))(rng);
        d.r[rho] = r;
        const auto& rk = inst.ranking(rho);
        d.l[rho].resize(rk.size());
        for (std::size_t k = 0; k < rk.size(); ++k) {
            const auto& e = inst.catalog().entry(rk.entries[k].index);
            Count cap = std::min(e.capacity, r);
            d.l[rho][k] = e.pinned ? static_cast<double>(r)
                                   : static_cast<double>(std::uniform_int_distribution<Count>(0, cap)(rng));
        }
    }
    return d;
}

/// Random point of [0,1]^{V x M} with pinned coordinates at 1 (ignores budgets).
template <class Rng>
Allocation random_box_point(const Instance& inst, Rng& rng, bool integral) {
    Allocation y(inst.dim());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t k = 0; k < y.size(); ++k) {
        double v = u(rng);
        y[k] = inst.pinned(k) ? 1.0 : (integral ? (v < 0.5 ? 0.0 : 1.0) : v);
    }
    return y;
}

/// Random point of the fractional feasible set: projections of random positive vectors.
template <class Rng>
Allocation random_simplex_point(const Instance& inst, Rng& rng) {
    Allocation y = inst.catalog().omega();
    std::lognormal_distribution<double> ln(0.0, 1.5);
    for (const auto& n : node_layouts(inst)) {
        if (n.kind == NodeLayout::Kind::all_ones) {
            for (std::size_t idx : n.free) y[idx] = 1.0;
            continue;
        }
        if (n.kind == NodeLayout::Kind::frozen_zero) continue;
        std::vector<double> h(n.free.size());
        for (double& v : h) v = ln(rng);
        auto p = bregman_project(h, n.sizes, n.budget);
        for (std::size_t k = 0; k < n.free.size(); ++k) y[n.free[k]] = p[k];
    }
    return y;
}

}  // namespace infida
