#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "error.hpp"
#include "serving.hpp"

namespace infida {

/// Megabytes newly fetched when moving from allocation `prev` to `next`.
inline double fetched_mb(const Allocation& prev, const Allocation& next, const std::vector<double>& sizes) {
    double f = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) f += sizes[k] * std::max(0.0, next[k] - prev[k]);
    return f;
}

/// Time-averaged gain per request; slots without requests contribute 0.
inline double ntag(const std::vector<double>& gains, const std::vector<Count>& batch_sizes) {
    if (gains.size() != batch_sizes.size()) throw ValidationError("gain and batch sequences differ in length");
    if (gains.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t t = 0; t < gains.size(); ++t)
        if (batch_sizes[t] > 0) s += gains[t] / static_cast<double>(batch_sizes[t]);
    return s / static_cast<double>(gains.size());
}

/// Time-averaged megabytes fetched per slot.
inline double model_updates(const std::vector<Allocation>& allocations, const std::vector<double>& sizes) {
    if (allocations.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t t = 1; t < allocations.size(); ++t) s += fetched_mb(allocations[t - 1], allocations[t], sizes);
    return s / static_cast<double>(allocations.size());
}

struct RunMetrics {
    double ntag = 0.0;
    double mu = 0.0;
};

inline RunMetrics compute_metrics(const std::vector<double>& gains, const std::vector<Count>& batch_sizes,
                                  const std::vector<Allocation>& allocations, const std::vector<double>& sizes) {
    if (allocations.size() != gains.size()) throw ValidationError("allocation and gain sequences differ in length");
    return {ntag(gains, batch_sizes), model_updates(allocations, sizes)};
}

}  // namespace infida
