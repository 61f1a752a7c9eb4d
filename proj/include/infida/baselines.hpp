#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

#include "evaluate.hpp"
#include "serving.hpp"

namespace infida {

// Static greedy -------------------------------------------------------------

struct GreedyOptions {
    bool lazy = true;  ///< re-evaluate stale candidates only when they reach the top
};

struct GreedyResult {
    Allocation x;
    std::vector<std::size_t> order;  ///< dense indices in selection order
    std::vector<double> gains;       ///< time-averaged gain after each selection, gains[0] for omega
    bool all_served_off_repository = false;
};

/**
 * \brief Cost-benefit greedy on the time-averaged gain: from omega, repeatedly deploy the
 * budget-feasible (node, model) with the largest marginal gain per megabyte, with
 * capacities recomputed by the scheduler for each candidate.
 */
inline GreedyResult static_greedy(const Instance& inst, const Trace& trace, const GreedyOptions& opt = {}) {
    TraceEvaluator ev(inst, trace);
    const std::size_t T = inst.catalog().num_tasks();
    const std::size_t M = inst.num_models();
    GreedyResult out;
    out.x = inst.catalog().omega();
    std::vector<double> residual(inst.num_nodes());
    for (std::size_t v = 0; v < inst.num_nodes(); ++v)
        residual[v] = inst.budget(static_cast<NodeId>(v)) - inst.catalog().pinned_size(static_cast<NodeId>(v));

    std::vector<double> task_gain(T, 0.0);
    std::vector<char> task_done(T, 0);
    std::vector<std::size_t> version(T, 0);
    auto repo_free = [&](std::size_t i) {
        return ev.evaluate_task(static_cast<TaskId>(i), out.x).repository_load <= 0.0;
    };
    double total = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
        auto e = ev.evaluate_task(static_cast<TaskId>(i), out.x);
        task_gain[i] = e.gain;
        task_done[i] = e.repository_load <= 0.0;
        total += e.gain;
    }
    out.gains.push_back(total);

    auto candidate_ok = [&](std::size_t idx) {
        std::size_t v = idx / M;
        return out.x[idx] == 0.0 && inst.size(idx) <= residual[v] + 1e-9;
    };
    auto marginal = [&](std::size_t idx) {
        TaskId i = inst.catalog().model(static_cast<ModelId>(idx % M)).task;
        out.x[idx] = 1.0;
        double g = ev.average_task_gain(i, out.x) - task_gain[static_cast<std::size_t>(i)];
        out.x[idx] = 0.0;
        return g;
    };
    // Only models whose task has a request type through the node can help.
    std::vector<std::size_t> pool;
    {
        std::vector<char> seen(inst.dim(), 0);
        for (const auto& rk : inst.rankings())
            for (const auto& e : rk.entries)
                if (!e.pinned && !seen[e.index]) {
                    seen[e.index] = 1;
                    pool.push_back(e.index);
                }
        std::sort(pool.begin(), pool.end());
    }

    using Item = std::tuple<double, std::ptrdiff_t, std::size_t, std::size_t>;  // density, -idx, idx, version
    auto task_of = [&](std::size_t idx) {
        return static_cast<std::size_t>(inst.catalog().model(static_cast<ModelId>(idx % M)).task);
    };
    auto all_done = [&] { return std::all_of(task_done.begin(), task_done.end(), [](char c) { return c != 0; }); };
    if (all_done()) {
        out.all_served_off_repository = true;
        return out;
    }

    auto select = [&](std::size_t idx, double g) {
        std::size_t i = task_of(idx);
        out.x[idx] = 1.0;
        residual[idx / M] -= inst.size(idx);
        task_gain[i] += g;
        ++version[i];
        task_done[i] = repo_free(i);
        total += g;
        out.order.push_back(idx);
        out.gains.push_back(total);
    };

    if (opt.lazy) {
        std::priority_queue<Item> pq;
        for (std::size_t idx : pool)
            if (candidate_ok(idx)) {
                double d = marginal(idx) / inst.size(idx);
                pq.emplace(d, -static_cast<std::ptrdiff_t>(idx), idx, version[task_of(idx)]);
            }
        while (!pq.empty() && !all_done()) {
            auto [d, neg, idx, ver] = pq.top();
            pq.pop();
            if (!candidate_ok(idx)) continue;
            if (ver != version[task_of(idx)]) {
                double nd = marginal(idx) / inst.size(idx);
                pq.emplace(nd, neg, idx, version[task_of(idx)]);
                continue;
            }
            if (!(d > 0.0)) break;
            select(idx, d * inst.size(idx));
        }
    } else {
        while (!all_done()) {
            double best = 0.0, best_g = 0.0;
            std::size_t best_idx = 0;
            bool found = false;
            for (std::size_t idx : pool) {
                if (!candidate_ok(idx)) continue;
                double g = marginal(idx);
                double d = g / inst.size(idx);
                if (d > best) {
                    best = d;
                    best_g = g;
                    best_idx = idx;
                    found = true;
                }
            }
            if (!found) break;
            select(best_idx, best_g);
        }
    }
    out.all_served_off_repository = all_done();
    return out;
}

// Online load-aware greedy --------------------------------------------------

struct OlagOptions {
    double decay = 0.0;  ///< fraction of each counter carried into the next slot
};

/**
 * \brief Per-node counters of requests that reached the node while a local model could
 * have served them cheaper than the repository; at slot end each node rebuilds its
 * allocation greedily by counter-weighted gain per megabyte.
 */
class OlagPolicy {
public:
    OlagPolicy(const Instance& inst, OlagOptions opt = {}) : inst_(&inst), opt_(opt) {
        x_ = inst.catalog().omega();
        const std::size_t V = inst.num_nodes();
        by_node_.assign(V, {});
        phi_.assign(inst.num_types(), {});
        q_.assign(inst.num_types(), {});
        for (std::size_t rho = 0; rho < inst.num_types(); ++rho) {
            const auto& rk = inst.ranking(rho);
            double repo = std::numeric_limits<double>::infinity();
            for (const auto& e : rk.entries)
                if (e.pinned) repo = std::min(repo, e.cost);
            phi_[rho].assign(rk.size(), 0.0);
            q_[rho].assign(rk.size(), 0.0);
            for (std::size_t k = 0; k < rk.size(); ++k) {
                const auto& e = rk.entries[k];
                q_[rho][k] = repo - e.cost;
                if (!e.pinned && q_[rho][k] > 0.0) by_node_[static_cast<std::size_t>(e.node)].push_back({e.index, rho, k});
            }
        }
        for (auto& list : by_node_)
            std::sort(list.begin(), list.end(), [](const Ref& a, const Ref& b) {
                return a.index != b.index ? a.index < b.index : a.rho < b.rho;
            });
    }

    const Allocation& integral() const noexcept { return x_; }

    /// Direct access for tests and for replaying externally observed counters.
    double& counter(std::size_t rho, std::size_t k) { return phi_.at(rho).at(k); }
    double gain_vs_repository(std::size_t rho, std::size_t k) const { return q_.at(rho).at(k); }

    /// Records arrivals per node from this slot's schedule.
    void record(const std::vector<Count>& r, const Schedule& s) {
        for (std::size_t rho = 0; rho < inst_->num_types(); ++rho) {
            const auto& rk = inst_->ranking(rho);
            std::size_t J = inst_->path_of(rho).size();
            std::vector<double> served_at(J + 2, 0.0);
            for (std::size_t k = 0; k < rk.size(); ++k) served_at[rk.entries[k].position] += s.load[rho][k];
            std::vector<double> arriving(J + 1, 0.0);
            double left = static_cast<double>(r[rho]);
            for (std::size_t j = 1; j <= J; ++j) {
                arriving[j] = left;
                left -= served_at[j];
            }
            for (std::size_t k = 0; k < rk.size(); ++k)
                if (q_[rho][k] > 0.0) phi_[rho][k] += arriving[rk.entries[k].position];
        }
    }

    /// Rebuilds every node's allocation from the counters, then decays them.
    void rebuild() {
        for (std::size_t v = 0; v < by_node_.size(); ++v) rebuild_node(v);
        for (auto& row : phi_)
            for (double& c : row) c *= opt_.decay;
    }

    void observe(const std::vector<Count>& r, const Schedule& s) {
        record(r, s);
        rebuild();
    }

private:
    struct Ref {
        std::size_t index;
        std::size_t rho;
        std::size_t k;
    };

    void rebuild_node(std::size_t v) {
        const std::size_t M = inst_->num_models();
        const auto& list = by_node_[v];
        double budget = inst_->budget(static_cast<NodeId>(v)) - inst_->catalog().pinned_size(static_cast<NodeId>(v));
        for (std::size_t m = 0; m < M; ++m) {
            std::size_t idx = v * M + m;
            if (!inst_->pinned(idx)) x_[idx] = 0.0;
        }
        if (list.empty()) return;
        // Working copies of this node's counters.
        std::vector<double> phi(list.size());
        for (std::size_t a = 0; a < list.size(); ++a) phi[a] = phi_[list[a].rho][list[a].k];
        const double inv_r = 1.0 / static_cast<double>(std::max<std::size_t>(1, inst_->num_types()));
        // group boundaries per dense index
        std::vector<std::size_t> starts;
        for (std::size_t a = 0; a < list.size(); ++a)
            if (a == 0 || list[a].index != list[a - 1].index) starts.push_back(a);
        starts.push_back(list.size());
        std::vector<char> taken(starts.size() - 1, 0);
        while (true) {
            double best_w = 0.0;
            std::size_t best = starts.size();
            for (std::size_t gi = 0; gi + 1 < starts.size(); ++gi) {
                if (taken[gi]) continue;
                std::size_t idx = list[starts[gi]].index;
                double s = inst_->size(idx);
                if (s > budget + 1e-9) continue;
                double L = static_cast<double>(inst_->catalog().entry(idx).capacity);
                double w = 0.0;
                for (std::size_t a = starts[gi]; a < starts[gi + 1]; ++a)
                    w += q_[list[a].rho][list[a].k] * std::min(phi[a], L);
                w *= inv_r / s;
                if (w > best_w) {
                    best_w = w;
                    best = gi;
                }
            }
            if (best == starts.size()) break;
            taken[best] = 1;
            std::size_t idx = list[starts[best]].index;
            x_[idx] = 1.0;
            budget -= inst_->size(idx);
            double L = static_cast<double>(inst_->catalog().entry(idx).capacity);
            for (std::size_t a = starts[best]; a < starts[best + 1]; ++a) {
                std::size_t rho = list[a].rho;
                double q_star = q_[rho][list[a].k];
                double delta = std::min(phi[a], L);
                for (std::size_t b = 0; b < list.size(); ++b)
                    if (list[b].rho == rho && (b == a || q_[rho][list[b].k] < q_star))
                        phi[b] = std::max(0.0, phi[b] - delta);
            }
        }
    }

    const Instance* inst_;
    OlagOptions opt_;
    Allocation x_;
    std::vector<std::vector<Ref>> by_node_;
    std::vector<std::vector<double>> phi_;
    std::vector<std::vector<double>> q_;
};

}  // namespace infida
