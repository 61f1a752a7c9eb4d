#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "error.hpp"

namespace infida {

inline double dual_map(double y, double s) { return s * (std::log(y) + 1.0); }
inline double inverse_dual_map(double y_hat, double s) { return std::exp(y_hat / s - 1.0); }

inline constexpr double max_primal = 1e300;

/**
 * \brief Gradient step in the dual space of the weighted negative entropy. Pinned
 * coordinates are copied unchanged; results are clamped to [eps_min, max_primal].
 */
inline std::vector<double> mirror_step(const std::vector<double>& y, const std::vector<double>& s,
                                       const std::vector<double>& g, double eta, const std::vector<char>& pinned,
                                       double eps_min = 1e-12) {
    std::vector<double> h(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (!pinned.empty() && pinned[k]) {
            h[k] = y[k];
            continue;
        }
        double v = inverse_dual_map(dual_map(std::max(y[k], eps_min), s[k]) + eta * g[k], s[k]);
        h[k] = std::clamp(std::isnan(v) ? eps_min : v, eps_min, max_primal);
    }
    return h;
}

/// Bregman divergence of the weighted negative entropy over the free coordinates.
inline double bregman_divergence(const std::vector<double>& y, const std::vector<double>& h,
                                 const std::vector<double>& s, const std::vector<char>& pinned = {}) {
    double d = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (!pinned.empty() && pinned[k]) continue;
        double t = y[k] > 0.0 ? y[k] * std::log(y[k] / h[k]) : 0.0;
        d += s[k] * (t - y[k] + h[k]);
    }
    return d;
}

struct ProjectionInfo {
    double multiplier = 1.0;  ///< common scale applied to the uncapped coordinates
    std::size_t scaled = 0;   ///< number of uncapped free coordinates
    bool corner = false;      ///< free sizes fit in the budget, everything set to 1
};

/**
 * \brief Projection onto {y in (0,1]: sum s y = min(b, |s|)} under the weighted negative
 * entropy, by a sorted scan over the number of uncapped coordinates. Pinned
 * coordinates are set to 1 and their sizes deducted from b first.
 */
inline std::vector<double> bregman_project(const std::vector<double>& h, const std::vector<double>& s, double b,
                                           const std::vector<char>& pinned = {}, double eps_min = 0.0,
                                           ProjectionInfo* info = nullptr) {
    const std::size_t M = h.size();
    if (s.size() != M) throw ValidationError("size vector has wrong length");
    std::vector<double> y(M, 1.0);
    std::vector<std::size_t> free;
    double budget = b;
    for (std::size_t k = 0; k < M; ++k) {
        if (!pinned.empty() && pinned[k])
            budget -= s[k];
        else
            free.push_back(k);
    }
    ProjectionInfo local;
    if (!info) info = &local;
    *info = {};
    double free_size = 0.0;
    for (std::size_t k : free) free_size += s[k];
    if (budget < -1e-9 * std::max(1.0, b)) throw InfeasibleError("pinned models exceed the budget");
    if (free.empty() || free_size <= budget) {
        info->corner = true;
        return y;
    }
    if (budget <= 0.0) throw InfeasibleError("no budget left for free coordinates");
    for (std::size_t k : free)
        if (!(h[k] > 0.0)) throw ValidationError("projection input must be positive");

    std::sort(free.begin(), free.end(), [&](std::size_t a, std::size_t c) { return h[a] != h[c] ? h[a] < h[c] : a < c; });
    const std::size_t n = free.size();
    std::vector<double> prefix(n + 1, 0.0), suffix(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) prefix[j + 1] = prefix[j] + s[free[j]] * h[free[j]];
    for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] + s[free[j]];

    std::size_t k_sel = 0;
    double m_sel = 0.0;
    for (std::size_t k = n; k >= 1; --k) {
        double num = budget - suffix[k];
        if (num <= 0.0) continue;
        double m = num / prefix[k];
        bool below = h[free[k - 1]] * m < 1.0;
        bool above = k == n || 1.0 <= h[free[k]] * m;
        if (below && above) {
            k_sel = k;
            m_sel = m;
            break;
        }
    }
    if (k_sel == 0) {
        // Rounding left no exact breakpoint; solve sum s min(1, m h) = budget by bisection.
        double lo = 0.0, hi = 1.0 / h[free[0]];
        auto mass = [&](double m) {
            double t = 0.0;
            for (std::size_t k : free) t += s[k] * std::min(1.0, m * h[k]);
            return t;
        };
        while (mass(hi) < budget) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (mass(mid) < budget ? lo : hi) = mid;
        }
        m_sel = 0.5 * (lo + hi);
        k_sel = 0;
        while (k_sel < n && h[free[k_sel]] * m_sel < 1.0) ++k_sel;
    }
    for (std::size_t j = 0; j < n; ++j) y[free[j]] = j < k_sel ? h[free[j]] * m_sel : 1.0;
    info->multiplier = m_sel;
    info->scaled = k_sel;

    if (eps_min > 0.0) {
        double lifted = 0.0, movable = 0.0;
        for (std::size_t j = 0; j < k_sel; ++j) {
            double& v = y[free[j]];
            if (v < eps_min) {
                lifted += s[free[j]] * (eps_min - v);
                v = eps_min;
            } else {
                movable += s[free[j]] * v;
            }
        }
        if (lifted > 0.0 && movable > lifted) {
            double f = (movable - lifted) / movable;
            for (std::size_t j = 0; j < k_sel; ++j) {
                double& v = y[free[j]];
                if (v > eps_min) v = std::max(eps_min, v * f);
            }
        }
    }
    return y;
}

}  // namespace infida
