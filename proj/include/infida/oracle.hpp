#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "error.hpp"
#include "evaluate.hpp"
#include "policy.hpp"

namespace infida {

struct StaticOptimum {
    Allocation x;
    double gain = 0.0;
    std::size_t evaluated = 0;
};

/// Free coordinates that fit their node's budget on their own.
inline std::vector<std::vector<std::size_t>> candidate_coordinates(const Instance& inst) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto& n : node_layouts(inst)) {
        std::vector<std::size_t> c;
        for (std::size_t k = 0; k < n.free.size(); ++k)
            if (n.sizes[k] <= n.budget + 1e-9) c.push_back(n.free[k]);
        out.push_back(std::move(c));
    }
    return out;
}

/// Calls f on every budget-feasible integral allocation.
inline void for_each_feasible(const Instance& inst, const std::function<void(const Allocation&)>& f) {
    auto cand = candidate_coordinates(inst);
    auto layouts = node_layouts(inst);
    Allocation x = inst.catalog().omega();
    std::function<void(std::size_t, std::size_t, double)> rec = [&](std::size_t v, std::size_t k, double left) {
        if (v == cand.size()) {
            f(x);
            return;
        }
        if (k == cand[v].size()) {
            rec(v + 1, 0, v + 1 < layouts.size() ? layouts[v + 1].budget : 0.0);
            return;
        }
        std::size_t idx = cand[v][k];
        rec(v, k + 1, left);
        if (inst.size(idx) <= left + 1e-9) {
            x[idx] = 1.0;
            rec(v, k + 1, left - inst.size(idx));
            x[idx] = 0.0;
        }
    };
    rec(0, 0, layouts.empty() ? 0.0 : layouts[0].budget);
}

/// Exhaustive maximiser of the time-averaged gain over budget-feasible integral allocations.
inline StaticOptimum brute_force_static_opt(const Instance& inst, const Trace& trace, std::size_t max_free = 20) {
    std::size_t n = 0;
    for (const auto& c : candidate_coordinates(inst)) n += c.size();
    if (n > max_free)
        throw ValidationError("instance has " + std::to_string(n) + " free coordinates; exhaustive search is limited to " +
                              std::to_string(max_free));
    TraceEvaluator ev(inst, trace);
    StaticOptimum best;
    best.x = inst.catalog().omega();
    best.gain = ev.average_gain(best.x);
    for_each_feasible(inst, [&](const Allocation& x) {
        ++best.evaluated;
        double g = ev.average_gain(x);
        if (g > best.gain + 1e-12 * std::max(1.0, std::abs(best.gain))) {
            best.gain = g;
            best.x = x;
        }
    });
    return best;
}

}  // namespace infida
