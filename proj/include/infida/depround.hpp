#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "error.hpp"

namespace infida {

enum class RoundingMode { slack, strict };

namespace detail {

inline constexpr double integral_tol = 1e-12;

inline bool fractional(double v) { return v > integral_tol && v < 1.0 - integral_tol; }

inline double snap(double v) {
    if (v <= integral_tol) return 0.0;
    if (v >= 1.0 - integral_tol) return 1.0;
    return v;
}

}  // namespace detail

/// splitmix64 finaliser, used to derive independent per-node streams.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t z = a ^ (b * 0x9e3779b97f4a7c15ULL) ^ (c * 0xc2b2ae3d27d4eb4fULL);
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stream for (master seed, node, slot).
inline std::mt19937_64 node_rng(std::uint64_t seed, std::uint64_t node, std::uint64_t slot) {
    return std::mt19937_64(mix_seed(seed, node + 1, slot + 1));
}

struct RoundingResult {
    std::vector<double> x;
    std::ptrdiff_t residual = -1;  ///< coordinate decided by the final coin, -1 if none
};

/**
 * \brief Dependent rounding with sizes: repeatedly moves mass between the two lowest-index
 * fractional coordinates, keeping sum s y fixed and the marginals unbiased, until at most
 * one fractional coordinate remains; that one is decided by an independent coin.
 */
template <class Rng>
RoundingResult depround(const std::vector<double>& y, const std::vector<double>& s, Rng& rng) {
    if (y.size() != s.size()) throw ValidationError("size vector has wrong length");
    RoundingResult out;
    out.x.resize(y.size());
    std::vector<std::size_t> frac;
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (!(y[k] >= -detail::integral_tol && y[k] <= 1.0 + detail::integral_tol))
            throw ValidationError("rounding input outside [0,1]");
        out.x[k] = detail::snap(y[k]);
        if (detail::fractional(out.x[k])) frac.push_back(k);
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // The pair is always the two lowest-index fractional coordinates: each step makes at
    // least one of them integral, and the survivor precedes everything not yet visited.
    std::size_t next = 0;
    auto pull = [&]() -> std::ptrdiff_t {
        while (next < frac.size()) {
            std::size_t k = frac[next++];
            if (detail::fractional(out.x[k])) return static_cast<std::ptrdiff_t>(k);
        }
        return -1;
    };
    std::ptrdiff_t cur = pull();
    while (cur >= 0) {
        std::ptrdiff_t nj = pull();
        if (nj < 0) break;
        auto i = static_cast<std::size_t>(cur), j = static_cast<std::size_t>(nj);
        double& yi = out.x[i];
        double& yj = out.x[j];
        double a1 = std::min(1.0 - yi, s[j] / s[i] * yj);
        double a2 = std::min(yi, s[j] / s[i] * (1.0 - yj));
        if (u(rng) * (a1 + a2) < a2) {
            bool i_hits = 1.0 - yi <= s[j] / s[i] * yj;
            yi += a1;
            yj -= s[i] / s[j] * a1;
            if (i_hits) yi = 1.0; else yj = 0.0;
        } else {
            bool i_hits = yi <= s[j] / s[i] * (1.0 - yj);
            yi -= a2;
            yj += s[i] / s[j] * a2;
            if (i_hits) yi = 0.0; else yj = 1.0;
        }
        yi = detail::snap(yi);
        yj = detail::snap(yj);
        if (detail::fractional(yi)) continue;
        if (detail::fractional(yj)) cur = nj;
        else
            cur = pull();
    }
    if (cur >= 0) {
        auto k = static_cast<std::size_t>(cur);
        out.residual = cur;
        out.x[k] = u(rng) < out.x[k] ? 1.0 : 0.0;
    }
    return out;
}

/**
 * \brief Rounding that never exceeds the budget: if the coin-decided coordinate pushes the
 * total over b it is dropped, and the highest-scoring undeployed coordinate that still
 * fits is deployed instead (when its score is positive).
 */
template <class Rng>
RoundingResult depround_strict(const std::vector<double>& y, const std::vector<double>& s, double b, Rng& rng,
                               const std::function<double(std::size_t)>& score) {
    auto out = depround(y, s, rng);
    double used = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) used += s[k] * out.x[k];
    if (out.residual >= 0 && out.x[static_cast<std::size_t>(out.residual)] == 1.0 && used > b + 1e-9 * std::max(1.0, b)) {
        auto r = static_cast<std::size_t>(out.residual);
        out.x[r] = 0.0;
        used -= s[r];
        std::ptrdiff_t best = -1;
        double best_score = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            if (out.x[k] == 1.0 || k == r || used + s[k] > b + 1e-9 * std::max(1.0, b)) continue;
            double sc = score ? score(k) : 0.0;
            if (sc > best_score) {
                best_score = sc;
                best = static_cast<std::ptrdiff_t>(k);
            }
        }
        if (best >= 0) out.x[static_cast<std::size_t>(best)] = 1.0;
    }
    return out;
}

}  // namespace infida
