#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"
#include "instance.hpp"

namespace infida {

/// Zipf pmf p(i) proportional to (i+1)^-exponent.
inline std::vector<double> popularity_pmf(int n, double exponent) {
    if (n < 1) throw ValidationError("popularity needs at least one task");
    if (!(exponent >= 0.0)) throw ValidationError("exponent must be non-negative");
    std::vector<double> p(static_cast<std::size_t>(n));
    double z = 0.0;
    for (int i = 0; i < n; ++i) z += p[static_cast<std::size_t>(i)] = std::pow(i + 1.0, -exponent);
    for (double& v : p) v /= z;
    return p;
}

enum class ProfileKind { fixed, sliding };

struct PopularityProfile {
    ProfileKind kind = ProfileKind::fixed;
    int tasks = 20;
    double exponent = 1.2;
    double window = 2.7e7;  ///< requests per shift period; +inf disables shifting
    int shift = 5;          ///< tasks per shift

    void validate() const {
        if (tasks < 1) throw ValidationError("profile needs at least one task");
        if (!(exponent >= 0.0)) throw ValidationError("exponent must be non-negative");
        if (!(window > 0.0)) throw ValidationError("sliding window must be positive");
        if (shift < 0 || shift >= tasks) throw ValidationError("shift must be in [0, tasks)");
    }

    /// Number of shifts applied at cumulative request index l.
    std::uint64_t period(std::uint64_t l) const {
        if (kind == ProfileKind::fixed || std::isinf(window)) return 0;
        return static_cast<std::uint64_t>(std::floor(static_cast<double>(l) / window));
    }

    /// Task pmf at cumulative request index l.
    std::vector<double> pmf_at(std::uint64_t l) const {
        auto p = popularity_pmf(tasks, exponent);
        std::uint64_t s = (period(l) * static_cast<std::uint64_t>(shift)) % static_cast<std::uint64_t>(tasks);
        std::vector<double> q(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) q[i] = p[(i + s) % p.size()];
        return q;
    }

    /// First cumulative index after l at which the pmf changes.
    std::uint64_t next_change(std::uint64_t l) const {
        if (kind == ProfileKind::fixed || std::isinf(window)) return std::numeric_limits<std::uint64_t>::max();
        std::uint64_t k = period(l) + 1;
        auto b = static_cast<std::uint64_t>(std::ceil(static_cast<double>(k) * window));
        return b > l ? b : l + 1;
    }
};

struct RequestBatch {
    std::size_t slot = 0;
    std::vector<Count> counts;  ///< per request type of the instance

    Count total() const {
        Count t = 0;
        for (Count c : counts) t += c;
        return t;
    }
};

namespace detail {

template <class Rng>
std::vector<Count> multinomial(Count n, const std::vector<double>& p, Rng& rng) {
    std::vector<Count> out(p.size(), 0);
    double rest = 1.0;
    for (std::size_t i = 0; i < p.size() && n > 0; ++i) {
        if (i + 1 == p.size() || p[i] >= rest) {
            out[i] = n;
            n = 0;
            break;
        }
        double q = std::clamp(p[i] / rest, 0.0, 1.0);
        std::binomial_distribution<Count> b(n, q);
        out[i] = b(rng);
        n -= out[i];
        rest -= p[i];
    }
    return out;
}

}  // namespace detail

/**
 * \brief Draws `n` requests i.i.d. from the task pmf in force at each request's cumulative
 * index (starting at `cumulative`), each sent uniformly to one of its task's request types.
 */
template <class Rng>
RequestBatch sample_batch(const Instance& inst, const PopularityProfile& profile, std::size_t slot,
                          std::uint64_t cumulative, Count n, Rng& rng) {
    profile.validate();
    if (n < 0) throw ValidationError("negative batch size");
    if (static_cast<std::size_t>(profile.tasks) != inst.catalog().num_tasks())
        throw ValidationError("profile task count differs from catalog");
    RequestBatch b;
    b.slot = slot;
    b.counts.assign(inst.num_types(), 0);
    std::uint64_t l = cumulative, end = cumulative + static_cast<std::uint64_t>(n);
    while (l < end) {
        std::uint64_t seg_end = std::min(end, profile.next_change(l));
        auto per_task = detail::multinomial(static_cast<Count>(seg_end - l), profile.pmf_at(l), rng);
        for (std::size_t i = 0; i < per_task.size(); ++i) {
            if (per_task[i] == 0) continue;
            const auto& ts = inst.types_of_task(static_cast<TaskId>(i));
            if (ts.empty()) throw ValidationError("task " + std::to_string(i) + " has no request types");
            std::vector<double> u(ts.size(), 1.0 / static_cast<double>(ts.size()));
            auto split = detail::multinomial(per_task[i], u, rng);
            for (std::size_t k = 0; k < ts.size(); ++k) b.counts[ts[k]] += split[k];
        }
        l = seg_end;
    }
    return b;
}

/** \brief Stateful per-slot generator with a cumulative request counter. */
class WorkloadGenerator {
public:
    WorkloadGenerator(const Instance& inst, PopularityProfile profile, Count per_slot, std::uint64_t seed)
        : inst_(&inst), profile_(profile), per_slot_(per_slot), rng_(seed) {
        profile_.validate();
        if (per_slot_ < 0) throw ValidationError("negative request rate");
    }

    RequestBatch next() {
        auto b = sample_batch(*inst_, profile_, ++slot_, cumulative_, per_slot_, rng_);
        cumulative_ += static_cast<std::uint64_t>(per_slot_);
        return b;
    }

    std::uint64_t cumulative() const noexcept { return cumulative_; }

private:
    const Instance* inst_;
    PopularityProfile profile_;
    Count per_slot_;
    std::mt19937_64 rng_;
    std::size_t slot_ = 0;
    std::uint64_t cumulative_ = 0;
};

/// Requests per slot for a rate in requests per second.
inline Count requests_per_slot(double rate_rps, double slot_seconds) {
    if (!(rate_rps >= 0.0)) throw ValidationError("negative request rate");
    return static_cast<Count>(std::llround(rate_rps * slot_seconds));
}

}  // namespace infida
