#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace infida {

using NodeId = int;
using TaskId = int;
using ModelId = int;

struct Node {
    NodeId id = 0;
    int tier = 0;
    std::string hardware;
    double budget_mb = 0.0;  ///< may be +inf for repository nodes
    NodeId parent = -1;      ///< -1 for roots and for explicit graphs without hierarchy
};

struct Edge {
    NodeId u = 0;
    NodeId v = 0;
    double latency_ms = 0.0;  ///< round-trip
};

class Topology {
public:
    Topology() = default;

    Topology(std::vector<Node> nodes, std::vector<Edge> edges)
        : nodes_(std::move(nodes)), edges_(std::move(edges)) {
        validate();
    }

    std::size_t size() const noexcept { return nodes_.size(); }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    const Node& node(NodeId v) const {
        check_node(v);
        return nodes_[static_cast<std::size_t>(v)];
    }

    bool contains(NodeId v) const noexcept {
        return v >= 0 && static_cast<std::size_t>(v) < nodes_.size();
    }

    std::optional<double> latency(NodeId u, NodeId v) const {
        auto it = latency_.find(key(u, v));
        if (it == latency_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<NodeId> nodes_in_tier(int tier) const {
        std::vector<NodeId> out;
        for (const auto& n : nodes_)
            if (n.tier == tier) out.push_back(n.id);
        return out;
    }

    int max_tier() const noexcept {
        int t = 0;
        for (const auto& n : nodes_) t = std::max(t, n.tier);
        return t;
    }

    /// Nodes at the deepest tier (base stations in a hierarchy).
    std::vector<NodeId> base_stations() const { return nodes_in_tier(max_tier()); }

    /// Walks parent links from origin to the root (inclusive).
    std::vector<NodeId> path_to_root(NodeId origin) const {
        check_node(origin);
        std::vector<NodeId> out{origin};
        NodeId v = origin;
        while (nodes_[static_cast<std::size_t>(v)].parent >= 0) {
            v = nodes_[static_cast<std::size_t>(v)].parent;
            if (out.size() > nodes_.size()) throw ValidationError("parent links form a cycle");
            out.push_back(v);
        }
        return out;
    }

    void set_budget(NodeId v, double budget_mb) {
        check_node(v);
        if (!(budget_mb >= 0.0)) throw ValidationError("budget must be non-negative");
        nodes_[static_cast<std::size_t>(v)].budget_mb = budget_mb;
    }

private:
    static std::pair<NodeId, NodeId> key(NodeId u, NodeId v) { return u < v ? std::pair{u, v} : std::pair{v, u}; }

    void check_node(NodeId v) const {
        if (!contains(v)) throw ValidationError("unknown node " + std::to_string(v));
    }

    void validate() {
        if (nodes_.empty()) throw ValidationError("topology has no nodes");
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const auto& n = nodes_[i];
            if (n.id != static_cast<NodeId>(i)) throw ValidationError("node ids must be dense and ordered");
            if (n.tier < 0) throw ValidationError("negative tier on node " + std::to_string(i));
            if (!(n.budget_mb >= 0.0)) throw ValidationError("negative budget on node " + std::to_string(i));
            if (n.parent >= static_cast<NodeId>(nodes_.size()) || n.parent == n.id)
                throw ValidationError("bad parent on node " + std::to_string(i));
        }
        std::vector<std::vector<NodeId>> adj(nodes_.size());
        for (const auto& e : edges_) {
            check_node(e.u);
            check_node(e.v);
            if (e.u == e.v) throw ValidationError("self loop on node " + std::to_string(e.u));
            if (!(e.latency_ms >= 0.0) || !std::isfinite(e.latency_ms))
                throw ValidationError("edge latency must be finite and non-negative");
            if (!latency_.emplace(key(e.u, e.v), e.latency_ms).second)
                throw ValidationError("duplicate edge");
            adj[static_cast<std::size_t>(e.u)].push_back(e.v);
            adj[static_cast<std::size_t>(e.v)].push_back(e.u);
        }
        for (const auto& n : nodes_)
            if (n.parent >= 0 && !latency(n.id, n.parent))
                throw ValidationError("node " + std::to_string(n.id) + " has no edge to its parent");
        std::vector<char> seen(nodes_.size(), 0);
        std::queue<NodeId> q;
        q.push(0);
        seen[0] = 1;
        std::size_t count = 1;
        while (!q.empty()) {
            NodeId u = q.front();
            q.pop();
            for (NodeId w : adj[static_cast<std::size_t>(u)])
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    ++count;
                    q.push(w);
                }
        }
        if (count != nodes_.size()) throw ValidationError("topology graph is not connected");
    }

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::map<std::pair<NodeId, NodeId>, double> latency_;
};

/** \brief One tier of a hierarchy. `uplink_latency_ms` is the round trip to the parent tier. */
struct TierSpec {
    int tier = 0;
    int count = 0;
    double budget_mb = 0.0;
    std::string hardware;
    double uplink_latency_ms = 0.0;
};

/**
 * \brief Tree hierarchy: every node of a tier attaches to a node of the next present
 * lower tier, children distributed round-robin. Ids are assigned from the deepest tier
 * down, so base stations come first. Exactly one tier-0 node is required.
 */
inline Topology build_hierarchical_topology(std::vector<TierSpec> tiers) {
    if (tiers.empty()) throw ValidationError("no tiers given");
    std::sort(tiers.begin(), tiers.end(), [](const TierSpec& a, const TierSpec& b) { return a.tier > b.tier; });
    for (std::size_t i = 0; i < tiers.size(); ++i) {
        if (tiers[i].count <= 0) throw ValidationError("tier " + std::to_string(tiers[i].tier) + " is empty");
        if (tiers[i].tier < 0) throw ValidationError("negative tier");
        if (i > 0 && tiers[i].tier == tiers[i - 1].tier) throw ValidationError("tier listed twice");
        if (!(tiers[i].uplink_latency_ms >= 0.0)) throw ValidationError("negative latency");
        if (!(tiers[i].budget_mb >= 0.0)) throw ValidationError("negative budget");
    }
    if (tiers.back().tier != 0 || tiers.back().count != 1)
        throw ValidationError("hierarchy needs exactly one tier-0 node");

    std::vector<NodeId> first(tiers.size());
    NodeId next = 0;
    for (std::size_t i = 0; i < tiers.size(); ++i) {
        first[i] = next;
        next += tiers[i].count;
    }
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < tiers.size(); ++i) {
        for (int c = 0; c < tiers[i].count; ++c) {
            Node n;
            n.id = first[i] + c;
            n.tier = tiers[i].tier;
            n.hardware = tiers[i].hardware;
            n.budget_mb = tiers[i].budget_mb;
            if (i + 1 < tiers.size()) {
                n.parent = first[i + 1] + c % tiers[i + 1].count;
                edges.push_back({n.id, n.parent, tiers[i].uplink_latency_ms});
            }
            nodes.push_back(n);
        }
    }
    return Topology(std::move(nodes), std::move(edges));
}

class RequestPath {
public:
    RequestPath() = default;

    RequestPath(const Topology& topo, std::vector<NodeId> nodes) : nodes_(std::move(nodes)) {
        if (nodes_.empty()) throw ValidationError("empty path");
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            if (!topo.contains(nodes_[j])) throw ValidationError("unknown node " + std::to_string(nodes_[j]));
            for (std::size_t k = 0; k < j; ++k)
                if (nodes_[k] == nodes_[j]) throw ValidationError("path is not simple");
            if (j > 0) {
                auto w = topo.latency(nodes_[j - 1], nodes_[j]);
                if (!w) throw ValidationError("path uses a missing edge");
                hop_.push_back(*w);
            }
        }
        prefix_.assign(nodes_.size(), 0.0);
        for (std::size_t j = 1; j < nodes_.size(); ++j) prefix_[j] = prefix_[j - 1] + hop_[j - 1];
    }

    std::size_t size() const noexcept { return nodes_.size(); }
    const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
    NodeId at(std::size_t j) const { return nodes_.at(j - 1); }  ///< 1-based
    NodeId terminal() const { return nodes_.back(); }

    /// Latency of the first j-1 hops; j is 1-based.
    double prefix_latency(std::size_t j) const {
        if (j < 1 || j > nodes_.size())
            throw ValidationError("path position " + std::to_string(j) + " out of range");
        return prefix_[j - 1];
    }

    /// 1-based position of v on the path, 0 if absent.
    std::size_t position(NodeId v) const noexcept {
        for (std::size_t j = 0; j < nodes_.size(); ++j)
            if (nodes_[j] == v) return j + 1;
        return 0;
    }

private:
    std::vector<NodeId> nodes_;
    std::vector<double> hop_;
    std::vector<double> prefix_;
};

inline nlohmann::json topology_to_json(const Topology& topo) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : topo.nodes()) {
        nlohmann::json jn{{"id", n.id}, {"tier", n.tier}, {"hardware", n.hardware}, {"parent", n.parent}};
        if (std::isfinite(n.budget_mb))
            jn["budget_mb"] = n.budget_mb;
        else
            jn["budget_mb"] = nullptr;
        j["nodes"].push_back(jn);
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& e : topo.edges()) j["edges"].push_back({{"u", e.u}, {"v", e.v}, {"latency_ms", e.latency_ms}});
    return j;
}

inline Topology topology_from_json(const nlohmann::json& j) {
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    for (const auto& jn : j.at("nodes")) {
        Node n;
        n.id = jn.at("id").get<NodeId>();
        n.tier = jn.value("tier", 0);
        n.hardware = jn.value("hardware", std::string{});
        n.parent = jn.value("parent", -1);
        const auto& b = jn.contains("budget_mb") ? jn.at("budget_mb") : nlohmann::json(nullptr);
        n.budget_mb = b.is_null() ? std::numeric_limits<double>::infinity() : b.get<double>();
        nodes.push_back(n);
    }
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    for (const auto& je : j.at("edges"))
        edges.push_back({je.at("u").get<NodeId>(), je.at("v").get<NodeId>(), je.at("latency_ms").get<double>()});
    return Topology(std::move(nodes), std::move(edges));
}

}  // namespace infida
