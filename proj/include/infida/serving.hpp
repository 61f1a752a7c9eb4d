#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "error.hpp"
#include "instance.hpp"

namespace infida {

/// Dense allocation over (node, model); integral allocations hold exact 0/1 values.
using Allocation = std::vector<double>;

/** \brief Batch counts per request type and potential capacities per (type, rank). */
struct SlotDemand {
    std::vector<Count> r;
    std::vector<std::vector<double>> l;
};

struct Schedule {
    std::vector<std::vector<double>> load;  ///< per type, per rank
    std::vector<std::vector<double>> l;     ///< potential available capacity, per type, per rank

    SlotDemand demand(const std::vector<Count>& r) const { return {r, l}; }
};

namespace detail {

inline double deficit_tolerance(double r) { return 1e-9 * std::max(1.0, r); }

inline void check_shape(const Instance& inst, const SlotDemand& d, const Allocation& y) {
    if (y.size() != inst.dim()) throw ValidationError("allocation has wrong dimension");
    if (d.r.size() != inst.num_types() || d.l.size() != inst.num_types())
        throw ValidationError("demand has wrong number of request types");
    for (std::size_t k = 0; k < inst.num_types(); ++k)
        if (d.l[k].size() != inst.ranking(k).size()) throw ValidationError("capacity vector has wrong length");
}

}  // namespace detail

inline bool is_integral(const Allocation& x) {
    for (double v : x)
        if (v != 0.0 && v != 1.0) return false;
    return true;
}

/// Every pinned coordinate at 1 and every coordinate within [0,1].
inline void check_allocation(const Instance& inst, const Allocation& y) {
    if (y.size() != inst.dim()) throw ValidationError("allocation has wrong dimension");
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (!(y[k] >= 0.0 && y[k] <= 1.0)) throw InfeasibleError("allocation coordinate outside [0,1]");
        if (inst.pinned(k) && y[k] != 1.0) throw InfeasibleError("repository model not allocated");
    }
}

/// Every l within min(L, r).
inline void check_demand(const Instance& inst, const SlotDemand& d) {
    for (std::size_t rho = 0; rho < inst.num_types(); ++rho) {
        if (d.r.at(rho) < 0) throw ValidationError("negative request count");
        const auto& rk = inst.ranking(rho);
        if (d.l.at(rho).size() != rk.size()) throw ValidationError("capacity vector has wrong length");
        for (std::size_t k = 0; k < rk.size(); ++k) {
            double cap = std::min<double>(static_cast<double>(inst.catalog().entry(rk.entries[k].index).capacity),
                                          static_cast<double>(d.r[rho]));
            if (!(d.l[rho][k] >= 0.0) || d.l[rho][k] > cap)
                throw ValidationError("potential capacity outside [0, min(L, r)]");
        }
    }
}

// Scheduling ----------------------------------------------------------------

/**
 * \brief Water-fills the listed request types (in the order given) over their deployed
 * models, then derives l for those types. `alloc` may be fractional, in which case a
 * model offers alloc * L capacity. Types of different tasks never share models, so any
 * subset closed under task gives the same per-type result as a full pass.
 */
inline void schedule_types(const Instance& inst, const Allocation& alloc, const std::vector<Count>& r,
                           const std::vector<std::size_t>& types, Schedule& out, std::vector<double>& used) {
    const auto& cat = inst.catalog();
    if (used.size() != inst.dim()) used.assign(inst.dim(), 0.0);
    for (std::size_t rho : types) {
        const auto& rk = inst.ranking(rho);
        auto& load = out.load[rho];
        load.assign(rk.size(), 0.0);
        double left = static_cast<double>(r[rho]);
        for (std::size_t k = 0; k < rk.size() && left > 0.0; ++k) {
            const auto& e = rk.entries[k];
            double a = alloc[e.index];
            if (a <= 0.0) continue;
            double cap = a * static_cast<double>(cat.entry(e.index).capacity) - used[e.index];
            if (cap <= 0.0) continue;
            double take = std::min(cap, left);
            load[k] = take;
            used[e.index] += take;
            left -= take;
        }
        if (left > detail::deficit_tolerance(static_cast<double>(r[rho])))
            throw InfeasibleError("request type " + std::to_string(rho) + " has " + std::to_string(left) +
                                  " unserved requests");
    }
    for (std::size_t rho : types) {
        const auto& rk = inst.ranking(rho);
        auto& l = out.l[rho];
        l.assign(rk.size(), 0.0);
        double rr = static_cast<double>(r[rho]);
        for (std::size_t k = 0; k < rk.size(); ++k) {
            const auto& e = rk.entries[k];
            double L = static_cast<double>(cat.entry(e.index).capacity);
            if (alloc[e.index] > 0.0) {
                double others = used[e.index] - out.load[rho][k];
                l[k] = std::max(0.0, std::min(L - others, rr));
            } else {
                l[k] = std::min(L, rr);
            }
        }
    }
    for (std::size_t rho : types)
        for (const auto& e : inst.ranking(rho).entries) used[e.index] = 0.0;
}

/// Deterministic scheduler over all types in ascending (task, path) order.
inline Schedule schedule_slot(const Instance& inst, const Allocation& x, const std::vector<Count>& r,
                              bool require_integral = true) {
    check_allocation(inst, x);
    if (require_integral && !is_integral(x)) throw InfeasibleError("scheduler needs an integral allocation");
    if (r.size() != inst.num_types()) throw ValidationError("batch has wrong number of request types");
    for (Count c : r)
        if (c < 0) throw ValidationError("negative request count");
    Schedule s;
    s.load.resize(inst.num_types());
    s.l.resize(inst.num_types());
    std::vector<std::size_t> all(inst.num_types());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    std::vector<double> used;
    schedule_types(inst, x, r, all, s, used);
    return s;
}

// Cost and gain -------------------------------------------------------------

/// Aggregate cost of one type.
inline double type_cost(const CostRanking& rk, Count r, const std::vector<double>& l, const Allocation& y) {
    double rr = static_cast<double>(r);
    double served = 0.0, cost = 0.0;
    for (std::size_t k = 0; k < rk.size(); ++k) {
        double z = y[rk.entries[k].index] * l[k];
        if (served < rr) cost += rk.entries[k].cost * std::min(rr - served, z);
        served += z;
    }
    if (served < rr - detail::deficit_tolerance(rr)) throw InfeasibleError("demand exceeds effective capacity");
    return cost;
}

inline double aggregate_cost(const Instance& inst, const SlotDemand& d, const Allocation& y) {
    detail::check_shape(inst, d, y);
    double c = 0.0;
    for (std::size_t rho = 0; rho < inst.num_types(); ++rho) c += type_cost(inst.ranking(rho), d.r[rho], d.l[rho], y);
    return c;
}

inline double type_gain(const CostRanking& rk, Count r, const std::vector<double>& l, const Allocation& y,
                        const Allocation& omega) {
    return type_cost(rk, r, l, omega) - type_cost(rk, r, l, y);
}

inline double gain(const Instance& inst, const SlotDemand& d, const Allocation& y) {
    detail::check_shape(inst, d, y);
    Allocation w = inst.catalog().omega();
    return aggregate_cost(inst, d, w) - aggregate_cost(inst, d, y);
}

/// Telescoping form over cumulative effective capacities.
inline double type_gain_compact(const CostRanking& rk, Count r, const std::vector<double>& l, const Allocation& y,
                                const Allocation& omega) {
    double rr = static_cast<double>(r);
    double sy = 0.0, sw = 0.0, g = 0.0;
    for (std::size_t k = 0; k + 1 < rk.size(); ++k) {
        std::size_t idx = rk.entries[k].index;
        sy += y[idx] * l[k];
        sw += omega[idx] * l[k];
        g += (rk.entries[k + 1].cost - rk.entries[k].cost) * (std::min(rr, sy) - std::min(rr, sw));
    }
    if (!rk.entries.empty()) sw += omega[rk.entries.back().index] * l.back();
    if (sw < rr - detail::deficit_tolerance(rr)) throw InfeasibleError("demand exceeds repository capacity");
    return g;
}

inline double gain_compact(const Instance& inst, const SlotDemand& d, const Allocation& y) {
    detail::check_shape(inst, d, y);
    Allocation w = inst.catalog().omega();
    double g = 0.0;
    for (std::size_t rho = 0; rho < inst.num_types(); ++rho)
        g += type_gain_compact(inst.ranking(rho), d.r[rho], d.l[rho], y, w);
    return g;
}

inline double type_bounding(const CostRanking& rk, Count r, const std::vector<double>& l, const Allocation& y,
                            const Allocation& omega) {
    if (r <= 0) return 0.0;
    double rr = static_cast<double>(r);
    double prod = 1.0, sw = 0.0, lam = 0.0;
    for (std::size_t k = 0; k + 1 < rk.size(); ++k) {
        std::size_t idx = rk.entries[k].index;
        prod *= 1.0 - y[idx] * l[k] / rr;
        sw += omega[idx] * l[k];
        if (std::min(rr, sw) == 0.0) lam += (rk.entries[k + 1].cost - rk.entries[k].cost) * rr * (1.0 - prod);
    }
    return lam;
}

/// Product-form lower bound of the gain.
inline double bounding_function(const Instance& inst, const SlotDemand& d, const Allocation& y) {
    detail::check_shape(inst, d, y);
    Allocation w = inst.catalog().omega();
    double v = 0.0;
    for (std::size_t rho = 0; rho < inst.num_types(); ++rho)
        v += type_bounding(inst.ranking(rho), d.r[rho], d.l[rho], y, w);
    return v;
}

/**
 * \brief For each ranking entry of type rho that is deployed in x, the number of deployed
 * models at strictly upstream path positions with strictly smaller cost; -1 for
 * entries not deployed.
 */
inline std::vector<int> better_upstream_alternatives(const Instance& inst, std::size_t rho, const Allocation& x) {
    const auto& rk = inst.ranking(rho);
    std::vector<int> out(rk.size(), -1);
    for (std::size_t k = 0; k < rk.size(); ++k) {
        if (x[rk.entries[k].index] <= 0.0) continue;
        int c = 0;
        for (std::size_t j = 0; j < k; ++j)
            if (x[rk.entries[j].index] > 0.0 && rk.entries[j].position > rk.entries[k].position &&
                rk.entries[j].cost < rk.entries[k].cost)
                ++c;
        out[k] = c;
    }
    return out;
}

}  // namespace infida
