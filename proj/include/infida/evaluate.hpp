#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "serving.hpp"
#include "trace.hpp"

namespace infida {

/**
 * \brief Time-averaged gain over a trace, with l recomputed by the scheduler for the
 * allocation being evaluated and then replaced by any explicit overrides of the slot.
 */
class TraceEvaluator {
public:
    TraceEvaluator(const Instance& inst, const Trace& trace) : inst_(&inst), trace_(&trace) {
        for (const auto& s : trace) counts_.push_back(batch_counts(inst, s));
        omega_ = inst.catalog().omega();
    }

    std::size_t slots() const noexcept { return counts_.size(); }
    const Instance& instance() const noexcept { return *inst_; }
    const std::vector<Count>& counts(std::size_t t) const { return counts_.at(t); }
    const TraceSlot& slot(std::size_t t) const { return trace_->at(t); }

    SlotDemand demand(std::size_t t, const Allocation& x) const {
        Schedule s = schedule_slot(*inst_, x, counts_.at(t), false);
        apply_overrides(*inst_, trace_->at(t), s.l);
        return {counts_[t], std::move(s.l)};
    }

    double average_gain(const Allocation& x) const {
        if (counts_.empty()) return 0.0;
        double g = 0.0;
        for (std::size_t t = 0; t < counts_.size(); ++t) g += gain_compact(*inst_, demand(t, x), x);
        return g / static_cast<double>(counts_.size());
    }

    struct TaskEval {
        double gain = 0.0;             ///< time-averaged gain of the task's types
        double repository_load = 0.0;  ///< requests served by pinned models, summed over slots
    };

    /// Evaluation restricted to the request types of one task; the full time-averaged gain
    /// is the sum of these over tasks.
    TaskEval evaluate_task(TaskId task, const Allocation& x) const {
        TaskEval out;
        if (counts_.empty()) return out;
        const auto& types = inst_->types_of_task(task);
        Schedule s;
        s.load.resize(inst_->num_types());
        s.l.resize(inst_->num_types());
        for (std::size_t t = 0; t < counts_.size(); ++t) {
            schedule_types(*inst_, x, counts_[t], types, s, used_);
            if (!trace_->at(t).overrides.empty()) apply_overrides(*inst_, trace_->at(t), s.l, task);
            for (std::size_t rho : types) {
                const auto& rk = inst_->ranking(rho);
                out.gain += type_gain_compact(rk, counts_[t][rho], s.l[rho], x, omega_);
                for (std::size_t k = 0; k < rk.size(); ++k)
                    if (rk.entries[k].pinned) out.repository_load += s.load[rho][k];
            }
        }
        out.gain /= static_cast<double>(counts_.size());
        return out;
    }

    double average_task_gain(TaskId task, const Allocation& x) const { return evaluate_task(task, x).gain; }

private:
    const Instance* inst_;
    const Trace* trace_;
    std::vector<std::vector<Count>> counts_;
    Allocation omega_;
    mutable std::vector<double> used_;
};

}  // namespace infida
