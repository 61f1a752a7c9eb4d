#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "catalog.hpp"
#include "error.hpp"
#include "topology.hpp"

namespace infida {

struct RequestType {
    TaskId task = 0;
    int path = 0;  ///< index into Instance::paths()
};

struct RankEntry {
    NodeId node = 0;
    ModelId model = 0;
    std::size_t position = 0;  ///< 1-based position on the path
    double cost = 0.0;
    std::size_t index = 0;  ///< dense (node, model) index
    bool pinned = false;
};

/** \brief All (node on path, model of task) pairs sorted by serving cost. */
struct CostRanking {
    std::vector<RankEntry> entries;
    std::vector<int> rank_of;  ///< dense (node, model) index -> 0-based rank, -1 off path

    std::size_t size() const noexcept { return entries.size(); }
};

/// Walks up the hierarchy from origin; the terminal must be a repository for the task.
inline RequestPath serving_path(const Topology& topo, const Catalog& catalog, NodeId origin, TaskId task) {
    if (!topo.contains(origin)) throw ValidationError("origin " + std::to_string(origin) + " not in topology");
    if (!catalog.has_task(task)) throw ValidationError("unknown task " + std::to_string(task));
    RequestPath p(topo, topo.path_to_root(origin));
    if (!catalog.is_repository_for(p.terminal(), task))
        throw ValidationError("no repository for task " + std::to_string(task));
    return p;
}

/// Cost of serving a request of `task` at path position j with model m.
inline double serving_cost(const Catalog& catalog, const RequestPath& path, TaskId task, std::size_t j, ModelId m,
                           double alpha) {
    const auto& mv = catalog.model(m);
    if (mv.task != task) throw ValidationError("model " + std::to_string(m) + " does not serve task " + std::to_string(task));
    const auto& e = catalog.entry(path.at(j), m);
    return path.prefix_latency(j) + e.delay_ms + alpha * 100.0 * (1.0 - mv.accuracy);
}

inline CostRanking rank_models(const Catalog& catalog, const RequestPath& path, TaskId task, double alpha) {
    CostRanking r;
    const auto& ms = catalog.task_models(task);
    for (std::size_t j = 1; j <= path.size(); ++j)
        for (ModelId m : ms) {
            NodeId v = path.at(j);
            r.entries.push_back({v, m, j, serving_cost(catalog, path, task, j, m, alpha), catalog.index(v, m),
                                 catalog.entry(v, m).pinned});
        }
    std::sort(r.entries.begin(), r.entries.end(), [](const RankEntry& a, const RankEntry& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.position != b.position) return a.position < b.position;
        return a.model < b.model;
    });
    r.rank_of.assign(catalog.num_entries(), -1);
    for (std::size_t k = 0; k < r.entries.size(); ++k) r.rank_of[r.entries[k].index] = static_cast<int>(k);
    return r;
}

class Instance {
public:
    Instance() = default;

    Instance(Topology topo, Catalog catalog, std::vector<RequestPath> paths, std::vector<RequestType> types,
             double alpha)
        : topo_(std::move(topo)), catalog_(std::move(catalog)), paths_(std::move(paths)), types_(std::move(types)),
          alpha_(alpha) {
        if (!(alpha_ >= 0.0)) throw ValidationError("alpha must be non-negative");
        if (catalog_.num_nodes() != topo_.size()) throw ValidationError("catalog and topology disagree on node count");
        std::sort(types_.begin(), types_.end(), [](const RequestType& a, const RequestType& b) {
            return a.task != b.task ? a.task < b.task : a.path < b.path;
        });
        for (std::size_t k = 1; k < types_.size(); ++k)
            if (types_[k].task == types_[k - 1].task && types_[k].path == types_[k - 1].path)
                throw ValidationError("duplicate request type");
        for (const auto& t : types_) {
            if (!catalog_.has_task(t.task)) throw ValidationError("request type with unknown task");
            if (t.path < 0 || static_cast<std::size_t>(t.path) >= paths_.size())
                throw ValidationError("request type with unknown path");
            if (!catalog_.is_repository_for(paths_[static_cast<std::size_t>(t.path)].terminal(), t.task))
                throw ValidationError("path terminal is not a repository for task " + std::to_string(t.task));
        }
        for (std::size_t v = 0; v < topo_.size(); ++v) {
            const auto& n = topo_.node(static_cast<NodeId>(v));
            double total = catalog_.total_size(static_cast<NodeId>(v));
            if (n.tier == 0 && !catalog_.pinned_at(n.id).empty() && n.budget_mb < total)
                throw ValidationError("repository node " + std::to_string(v) + " cannot hold the whole catalog");
            if (catalog_.pinned_size(n.id) > n.budget_mb)
                throw ValidationError("pinned models exceed the budget of node " + std::to_string(v));
        }
        tasks_types_.assign(catalog_.num_tasks(), {});
        for (std::size_t k = 0; k < types_.size(); ++k) {
            const auto& t = types_[k];
            rankings_.push_back(rank_models(catalog_, paths_[static_cast<std::size_t>(t.path)], t.task, alpha_));
            tasks_types_[static_cast<std::size_t>(t.task)].push_back(k);
        }
    }

    const Topology& topology() const noexcept { return topo_; }
    const Catalog& catalog() const noexcept { return catalog_; }
    const std::vector<RequestPath>& paths() const noexcept { return paths_; }
    const std::vector<RequestType>& types() const noexcept { return types_; }
    const std::vector<CostRanking>& rankings() const noexcept { return rankings_; }
    const CostRanking& ranking(std::size_t rho) const { return rankings_.at(rho); }
    const RequestPath& path_of(std::size_t rho) const { return paths_.at(static_cast<std::size_t>(types_.at(rho).path)); }
    double alpha() const noexcept { return alpha_; }

    std::size_t num_nodes() const noexcept { return topo_.size(); }
    std::size_t num_models() const noexcept { return catalog_.num_models(); }
    std::size_t num_types() const noexcept { return types_.size(); }
    std::size_t dim() const noexcept { return catalog_.num_entries(); }
    std::size_t index(NodeId v, ModelId m) const noexcept { return catalog_.index(v, m); }

    const std::vector<std::size_t>& types_of_task(TaskId i) const { return tasks_types_.at(static_cast<std::size_t>(i)); }

    std::optional<std::size_t> type_id(TaskId task, int path) const {
        for (std::size_t k = 0; k < types_.size(); ++k)
            if (types_[k].task == task && types_[k].path == path) return k;
        return std::nullopt;
    }

    double budget(NodeId v) const { return topo_.node(v).budget_mb; }
    double size(std::size_t idx) const { return catalog_.entry(idx).size_mb; }
    bool pinned(std::size_t idx) const { return catalog_.entry(idx).pinned; }

private:
    Topology topo_;
    Catalog catalog_;
    std::vector<RequestPath> paths_;
    std::vector<RequestType> types_;
    double alpha_ = 1.0;
    std::vector<CostRanking> rankings_;
    std::vector<std::vector<std::size_t>> tasks_types_;
};

/**
 * \brief One path per base station; each task is assigned to `origins_per_task` distinct
 * base stations drawn once from `rng` (all of them if fewer exist).
 */
template <class Rng>
std::pair<std::vector<RequestPath>, std::vector<RequestType>> assign_request_types(const Topology& topo,
                                                                                  const Catalog& catalog,
                                                                                  int origins_per_task, Rng& rng) {
    if (origins_per_task < 1) throw ValidationError("origins per task must be positive");
    auto bs = topo.base_stations();
    std::vector<RequestPath> paths;
    for (NodeId o : bs) paths.emplace_back(topo, topo.path_to_root(o));
    std::vector<RequestType> types;
    for (std::size_t i = 0; i < catalog.num_tasks(); ++i) {
        std::vector<int> pick(bs.size());
        for (std::size_t k = 0; k < pick.size(); ++k) pick[k] = static_cast<int>(k);
        std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(origins_per_task), pick.size());
        for (std::size_t k = 0; k < n; ++k) {
            std::uniform_int_distribution<std::size_t> d(k, pick.size() - 1);
            std::swap(pick[k], pick[d(rng)]);
        }
        std::sort(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n));
        for (std::size_t k = 0; k < n; ++k) {
            serving_path(topo, catalog, bs[static_cast<std::size_t>(pick[k])], static_cast<TaskId>(i));
            types.push_back({static_cast<TaskId>(i), pick[k]});
        }
    }
    return {std::move(paths), std::move(types)};
}

}  // namespace infida
