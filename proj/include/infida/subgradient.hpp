#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "error.hpp"
#include "serving.hpp"

namespace infida {

struct Subgradient {
    std::vector<double> g;           ///< dense over (node, model)
    std::vector<std::size_t> kstar;  ///< 0-based rank of the worst needed model, per type
};

namespace detail {

inline bool covers(double cumulative, double r) { return cumulative >= r - deficit_tolerance(r); }

}  // namespace detail

/// Centralised evaluation over all request types.
inline Subgradient subgradient(const Instance& inst, const SlotDemand& d, const Allocation& y) {
    detail::check_shape(inst, d, y);
    Subgradient out;
    out.g.assign(inst.dim(), 0.0);
    out.kstar.assign(inst.num_types(), 0);
    for (std::size_t rho = 0; rho < inst.num_types(); ++rho) {
        const auto& rk = inst.ranking(rho);
        const auto& l = d.l[rho];
        double r = static_cast<double>(d.r[rho]);
        double cum = 0.0;
        std::size_t ks = rk.size();
        if (d.r[rho] == 0) {
            ks = 0;
        } else {
            for (std::size_t k = 0; k < rk.size(); ++k) {
                cum += y[rk.entries[k].index] * l[k];
                if (detail::covers(cum, r)) {
                    ks = k;
                    break;
                }
            }
        }
        if (ks == rk.size()) throw InfeasibleError("no worst needed model: demand exceeds effective capacity");
        out.kstar[rho] = ks;
        double top = rk.entries[ks].cost;
        for (std::size_t k = 0; k < ks; ++k) out.g[rk.entries[k].index] += l[k] * (top - rk.entries[k].cost);
    }
    return out;
}

struct MessageStats {
    std::size_t messages = 0;         ///< control messages created (one per type with requests)
    std::size_t upstream_hops = 0;    ///< forwards towards the repository
    std::size_t downstream_hops = 0;  ///< broadcasts of the worst needed cost
    std::size_t max_pending = 0;      ///< largest list of deferred (capacity, cost) pairs carried
    std::size_t deferred = 0;         ///< pairs carried past the node that found them
};

struct MessageSubgradient {
    Subgradient grad;
    MessageStats stats;
};

/**
 * \brief Distributed evaluation. Per type, a message travels upstream carrying the batch
 * size, the cumulated effective capacity Z and a list of pending (rank, z) pairs that
 * cannot be added yet because a cheaper model may exist further upstream. A node adds
 * pending pairs in rank order while no unseen upstream model is cheaper; once Z covers
 * the batch, the worst needed cost is sent back downstream and every node on the way
 * computes its local components l * (gamma* - C).
 */
inline MessageSubgradient subgradient_via_messages(const Instance& inst, const SlotDemand& d, const Allocation& y) {
    detail::check_shape(inst, d, y);
    MessageSubgradient out;
    out.grad.g.assign(inst.dim(), 0.0);
    out.grad.kstar.assign(inst.num_types(), 0);
    for (std::size_t rho = 0; rho < inst.num_types(); ++rho) {
        if (d.r[rho] == 0) continue;
        const auto& rk = inst.ranking(rho);
        const auto& l = d.l[rho];
        const std::size_t J = inst.path_of(rho).size();
        double r = static_cast<double>(d.r[rho]);

        // Each node knows only its local ranks plus the cheapest rank found upstream of it.
        std::vector<std::vector<std::size_t>> local(J + 1);
        for (std::size_t k = 0; k < rk.size(); ++k) local[rk.entries[k].position].push_back(k);
        std::vector<std::size_t> upstream_min(J + 2, std::numeric_limits<std::size_t>::max());
        for (std::size_t h = J; h >= 1; --h) {
            std::size_t m = upstream_min[h + 1];
            for (std::size_t k : local[h]) m = std::min(m, k);
            upstream_min[h] = m;
        }

        ++out.stats.messages;
        std::vector<std::size_t> pending;  // ranks, kept sorted
        double Z = 0.0;
        std::size_t found_at = 0, ks = 0;
        for (std::size_t h = 1; h <= J && !found_at; ++h) {
            if (h > 1) ++out.stats.upstream_hops;
            for (std::size_t k : local[h]) pending.insert(std::lower_bound(pending.begin(), pending.end(), k), k);
            out.stats.max_pending = std::max(out.stats.max_pending, pending.size());
            std::size_t applied = 0;
            for (; applied < pending.size(); ++applied) {
                std::size_t k = pending[applied];
                if (k >= upstream_min[h + 1]) break;
                Z += y[rk.entries[k].index] * l[k];
                if (detail::covers(Z, r)) {
                    found_at = h;
                    ks = k;
                    ++applied;
                    break;
                }
            }
            pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(applied));
            if (!found_at && h < J) out.stats.deferred += pending.size();
        }
        if (!found_at) throw InfeasibleError("no worst needed model: demand exceeds effective capacity");
        out.stats.downstream_hops += found_at - 1;
        out.grad.kstar[rho] = ks;
        double top = rk.entries[ks].cost;
        for (std::size_t h = 1; h <= found_at; ++h)
            for (std::size_t k : local[h])
                if (k < ks)
                    out.grad.g[rk.entries[k].index] += l[k] * (top - rk.entries[k].cost);
    }
    return out;
}

/// max over coordinates of |g| / s, the dual norm used by the regret bound.
inline double dual_norm(const Instance& inst, const std::vector<double>& g) {
    double m = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) m = std::max(m, std::abs(g[k]) / inst.size(k));
    return m;
}

}  // namespace infida
