#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "depround.hpp"
#include "error.hpp"
#include "evaluate.hpp"
#include "mirror.hpp"
#include "serving.hpp"
#include "subgradient.hpp"

namespace infida {

/** \brief Refresh period B, constant or stretched linearly from `initial` to `target`. */
struct RefreshSchedule {
    int initial = 1;
    int target = 1;
    std::size_t stretch_slots = 0;

    static RefreshSchedule fixed(int b) { return {b, b, 0}; }
    static RefreshSchedule stretch(int b0, int b1, std::size_t dt) { return {b0, b1, dt}; }

    void validate() const {
        if (initial < 1 || target < 1) throw ValidationError("refresh period must be at least 1");
    }

    int period_at(std::size_t t) const {
        if (stretch_slots == 0) return target;
        double f = std::min(1.0, static_cast<double>(t) / static_cast<double>(stretch_slots));
        return std::max(1, static_cast<int>(std::lround(initial + (target - initial) * f)));
    }
};

/// Tracks the next slot at which a new integral allocation is sampled.
class RefreshClock {
public:
    explicit RefreshClock(RefreshSchedule s = {}) : s_(s) {
        s_.validate();
        next_ = static_cast<std::size_t>(s_.period_at(0));
    }

    /// True when slot t (1-based) ends with a refresh.
    bool due(std::size_t t) {
        if (t < next_) return false;
        next_ = t + static_cast<std::size_t>(s_.period_at(t));
        return true;
    }

private:
    RefreshSchedule s_;
    std::size_t next_ = 1;
};

/** \brief Per-node view of the free (non-pinned) coordinates. */
struct NodeLayout {
    NodeId node = 0;
    std::vector<std::size_t> free;  ///< dense indices
    std::vector<double> sizes;      ///< sizes of the free coordinates
    double budget = 0.0;            ///< node budget minus pinned sizes
    enum class Kind { projected, all_ones, frozen_zero } kind = Kind::projected;

    double free_size() const {
        double t = 0.0;
        for (double s : sizes) t += s;
        return t;
    }
};

inline std::vector<NodeLayout> node_layouts(const Instance& inst) {
    std::vector<NodeLayout> out;
    const std::size_t M = inst.num_models();
    for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
        NodeLayout n;
        n.node = static_cast<NodeId>(v);
        n.budget = inst.budget(n.node);
        for (std::size_t m = 0; m < M; ++m) {
            std::size_t idx = v * M + m;
            if (inst.pinned(idx))
                n.budget -= inst.size(idx);
            else {
                n.free.push_back(idx);
                n.sizes.push_back(inst.size(idx));
            }
        }
        if (n.budget < -1e-9) throw InfeasibleError("pinned models exceed the budget of node " + std::to_string(v));
        n.budget = std::max(0.0, n.budget);
        if (n.free_size() <= n.budget)
            n.kind = NodeLayout::Kind::all_ones;
        else if (n.budget <= 0.0)
            n.kind = NodeLayout::Kind::frozen_zero;
        out.push_back(std::move(n));
    }
    return out;
}

/** \brief Regret-bound constants for an instance and horizon. */
struct RegretConstants {
    double theta = 0.0;
    double sigma = 0.0;
    double d_max = 0.0;
    double A = 0.0;
    double eta_star = 0.0;
    double delta_c = 0.0;
    double l_max = 0.0;
    double s_min = 0.0;
    double s_max = 0.0;
    std::size_t num_types = 0;

    double bound(std::size_t T) const { return A * std::sqrt(static_cast<double>(T)); }
};

/// Largest saving against the repository cost over all types: max_rho (max pinned cost - gamma^1).
inline double cost_spread(const Instance& inst) {
    double dc = 0.0;
    for (const auto& rk : inst.rankings()) {
        if (rk.entries.empty()) continue;
        double repo = -std::numeric_limits<double>::infinity();
        for (const auto& e : rk.entries)
            if (e.pinned) repo = std::max(repo, e.cost);
        if (std::isfinite(repo)) dc = std::max(dc, repo - rk.entries.front().cost);
    }
    return dc;
}

inline RegretConstants regret_constants(const Instance& inst, std::size_t T, double l_max = -1.0,
                                        double delta_c = -1.0) {
    if (inst.num_models() == 0 || inst.dim() == 0) throw ValidationError("empty catalog");
    RegretConstants c;
    c.s_min = std::numeric_limits<double>::infinity();
    double cap = 0.0;
    for (std::size_t k = 0; k < inst.dim(); ++k) {
        c.s_min = std::min(c.s_min, inst.size(k));
        c.s_max = std::max(c.s_max, inst.size(k));
        cap = std::max(cap, static_cast<double>(inst.catalog().entry(k).capacity));
    }
    c.l_max = l_max >= 0.0 ? l_max : cap;
    c.delta_c = delta_c >= 0.0 ? delta_c : cost_spread(inst);
    c.num_types = inst.num_types();
    c.theta = 1.0 / (c.s_max * static_cast<double>(inst.num_nodes()) * static_cast<double>(inst.num_models()));
    c.sigma = static_cast<double>(c.num_types) * c.l_max * c.delta_c / c.s_min;
    for (const auto& n : node_layouts(inst)) {
        double total = n.free_size();
        double used = std::min(n.budget, total);
        if (used > 0.0) c.d_max += used * std::log(total / used);
    }
    c.A = (1.0 - 1.0 / std::exp(1.0)) * c.sigma * std::sqrt(2.0 * c.d_max / c.theta);
    c.eta_star = (c.sigma > 0.0 && T > 0) ? std::sqrt(2.0 * c.theta * c.d_max / static_cast<double>(T)) / c.sigma : 0.0;
    return c;
}

/**
 * \brief Fractional state of mirror ascent with its rounding step. Pinned coordinates
 * stay at 1; each node's free coordinates live on the weighted capped simplex.
 */
class MirrorAscent {
public:
    MirrorAscent(const Instance& inst, double eta, double eps_min = 1e-12)
        : inst_(&inst), layouts_(node_layouts(inst)), eta_(eta), eps_(eps_min) {
        if (!(eta_ >= 0.0)) throw ValidationError("learning rate must be non-negative");
        y_ = inst.catalog().omega();
        for (const auto& n : layouts_) {
            double c = 0.0;
            if (n.kind == NodeLayout::Kind::all_ones) c = 1.0;
            if (n.kind == NodeLayout::Kind::projected) c = n.budget / n.free_size();
            for (std::size_t idx : n.free) y_[idx] = c;
        }
    }

    const Allocation& y() const noexcept { return y_; }
    double eta() const noexcept { return eta_; }
    const std::vector<NodeLayout>& layouts() const noexcept { return layouts_; }

    void ascend(const std::vector<double>& g) {
        for (const auto& n : layouts_) {
            if (n.kind != NodeLayout::Kind::projected) continue;
            std::vector<double> yv(n.free.size()), gv(n.free.size());
            for (std::size_t k = 0; k < n.free.size(); ++k) {
                yv[k] = y_[n.free[k]];
                gv[k] = g[n.free[k]];
            }
            auto h = mirror_step(yv, n.sizes, gv, eta_, {}, eps_);
            auto p = bregman_project(h, n.sizes, n.budget, {}, eps_);
            for (std::size_t k = 0; k < n.free.size(); ++k) y_[n.free[k]] = p[k];
        }
    }

    /// Integral allocation drawn per node from (seed, node, slot) streams.
    Allocation round(std::uint64_t seed, std::uint64_t slot, RoundingMode mode = RoundingMode::slack,
                     const std::vector<double>* score = nullptr) const {
        return round_point(y_, seed, slot, mode, score);
    }

    Allocation round_point(const Allocation& y, std::uint64_t seed, std::uint64_t slot,
                           RoundingMode mode = RoundingMode::slack, const std::vector<double>* score = nullptr) const {
        Allocation x = inst_->catalog().omega();
        for (const auto& n : layouts_) {
            if (n.kind == NodeLayout::Kind::all_ones) {
                for (std::size_t idx : n.free) x[idx] = 1.0;
                continue;
            }
            if (n.kind == NodeLayout::Kind::frozen_zero) continue;
            std::vector<double> yv(n.free.size());
            for (std::size_t k = 0; k < n.free.size(); ++k) yv[k] = y[n.free[k]];
            auto rng = node_rng(seed, static_cast<std::uint64_t>(n.node), slot);
            RoundingResult r;
            if (mode == RoundingMode::strict) {
                std::function<double(std::size_t)> sc;
                if (score) sc = [&](std::size_t k) { return (*score)[n.free[k]] / n.sizes[k]; };
                r = depround_strict(yv, n.sizes, n.budget, rng, sc);
            } else {
                r = depround(yv, n.sizes, rng);
            }
            for (std::size_t k = 0; k < n.free.size(); ++k) x[n.free[k]] = r.x[k];
        }
        return x;
    }

private:
    const Instance* inst_;
    std::vector<NodeLayout> layouts_;
    Allocation y_;
    double eta_;
    double eps_;
};

struct InfidaOptions {
    double eta = 0.0;
    RefreshSchedule refresh = RefreshSchedule::fixed(1);
    double eps_min = 1e-12;
    RoundingMode rounding = RoundingMode::slack;
    bool use_messages = false;
    bool fractional_capacity = false;  ///< derive l from the fractional state instead of x
    std::uint64_t seed = 1;
};

/** \brief Online policy: one subgradient and mirror step per slot, rounding on refresh slots. */
class InfidaPolicy {
public:
    InfidaPolicy(const Instance& inst, InfidaOptions opt)
        : inst_(&inst), opt_(opt), core_(inst, opt.eta, opt.eps_min), clock_(opt.refresh) {
        x_ = core_.round(opt_.seed, 0, opt_.rounding);
    }

    const Allocation& fractional() const noexcept { return core_.y(); }
    const Allocation& integral() const noexcept { return x_; }
    std::size_t slot() const noexcept { return t_; }
    double last_dual_norm() const noexcept { return last_norm_; }
    const MessageStats& message_stats() const noexcept { return stats_; }
    const MirrorAscent& core() const noexcept { return core_; }

    /// Ends slot t: `d` holds this slot's batch and capacities. Returns true on refresh.
    bool step(const SlotDemand& d) {
        ++t_;
        SlotDemand used = d;
        if (opt_.fractional_capacity) used.l = schedule_slot(*inst_, core_.y(), d.r, false).l;
        Subgradient g;
        if (opt_.use_messages) {
            auto mg = subgradient_via_messages(*inst_, used, core_.y());
            stats_.messages += mg.stats.messages;
            stats_.upstream_hops += mg.stats.upstream_hops;
            stats_.downstream_hops += mg.stats.downstream_hops;
            stats_.max_pending = std::max(stats_.max_pending, mg.stats.max_pending);
            g = std::move(mg.grad);
        } else {
            g = subgradient(*inst_, used, core_.y());
        }
        last_norm_ = dual_norm(*inst_, g.g);
        core_.ascend(g.g);
        if (clock_.due(t_)) {
            x_ = core_.round(opt_.seed, t_, opt_.rounding, &g.g);
            ++refreshes_;
            return true;
        }
        return false;
    }

    std::size_t refreshes() const noexcept { return refreshes_; }

private:
    const Instance* inst_;
    InfidaOptions opt_;
    MirrorAscent core_;
    RefreshClock clock_;
    Allocation x_;
    std::size_t t_ = 0;
    std::size_t refreshes_ = 0;
    double last_norm_ = 0.0;
    MessageStats stats_;
};

struct OfflineOptions {
    std::size_t iterations = 100;
    double eta = 0.0;  ///< <= 0 selects the regret-optimal rate for `iterations` steps
    double eps_min = 1e-12;
    RoundingMode rounding = RoundingMode::slack;
    std::uint64_t seed = 1;
};

struct OfflineResult {
    Allocation x;
    Allocation y_avg;
};

/**
 * \brief Mirror ascent on the time-averaged gain of a full trace. Each iteration draws an
 * integral allocation from the current point to derive capacities via the scheduler,
 * averages the per-slot subgradients, and steps. Returns a rounding of the average iterate.
 */
inline OfflineResult infida_offline(const Instance& inst, const Trace& trace, const OfflineOptions& opt) {
    if (trace.empty()) throw ValidationError("offline optimisation needs a non-empty trace");
    if (opt.iterations == 0) throw ValidationError("offline optimisation needs at least one iteration");
    TraceEvaluator ev(inst, trace);
    double eta = opt.eta > 0.0 ? opt.eta : regret_constants(inst, opt.iterations).eta_star;
    MirrorAscent core(inst, eta, opt.eps_min);
    Allocation avg(inst.dim(), 0.0);
    std::vector<double> g(inst.dim());
    const double inv_t = 1.0 / static_cast<double>(ev.slots());
    for (std::size_t it = 0; it < opt.iterations; ++it) {
        for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += core.y()[k];
        Allocation x = core.round(mix_seed(opt.seed, 0x0ff1), it);
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t t = 0; t < ev.slots(); ++t) {
            auto sg = subgradient(inst, ev.demand(t, x), core.y());
            for (std::size_t k = 0; k < g.size(); ++k) g[k] += sg.g[k] * inv_t;
        }
        core.ascend(g);
    }
    for (double& v : avg) v /= static_cast<double>(opt.iterations);
    OfflineResult out;
    out.y_avg = avg;
    out.x = core.round_point(avg, opt.seed, 0, opt.rounding, &g);
    return out;
}

}  // namespace infida
