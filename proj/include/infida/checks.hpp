#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "policy.hpp"
#include "random_instance.hpp"
#include "serving.hpp"
#include "subgradient.hpp"

namespace infida {

struct CheckResult {
    std::string name;
    std::size_t trials = 0;
    std::size_t violations = 0;
    std::string counterexample;  ///< first violation, if any

    CheckResult() = default;
    CheckResult(std::string n) : name(std::move(n)) {}

    bool passed() const noexcept { return violations == 0; }
};

struct CheckReport {
    std::vector<CheckResult> results;

    bool passed() const {
        for (const auto& r : results)
            if (!r.passed()) return false;
        return true;
    }
};

using GainFn = std::function<double(const Instance&, const SlotDemand&, const Allocation&)>;

/** \brief Implementations under test; defaults are the library's own. */
struct GainFunctions {
    GainFn gain = [](const Instance& i, const SlotDemand& d, const Allocation& y) { return infida::gain(i, d, y); };
    GainFn gain_compact = [](const Instance& i, const SlotDemand& d, const Allocation& y) {
        return infida::gain_compact(i, d, y);
    };
    GainFn bounding = [](const Instance& i, const SlotDemand& d, const Allocation& y) {
        return bounding_function(i, d, y);
    };
};

struct CheckOptions {
    double tolerance = 1e-9;
    std::size_t exhaustive_limit = 10;  ///< submodularity enumeration up to this many free coordinates
    Count max_batch = 20;
};

namespace detail {

inline double rel_tol(double tol, double scale) { return tol * std::max(1.0, std::abs(scale)); }

inline void note(CheckResult& r, const std::string& msg) {
    ++r.violations;
    if (r.counterexample.empty()) r.counterexample = msg;
}

inline std::string show(const Allocation& y) {
    std::ostringstream os;
    os.precision(17);
    os << '[';
    for (std::size_t k = 0; k < y.size(); ++k) os << (k ? "," : "") << y[k];
    os << ']';
    return os.str();
}

}  // namespace detail

/// Exhaustive diminishing-returns and monotonicity test of the set function x -> G(r, l, x).
inline void check_submodular(const Instance& inst, const SlotDemand& d, const GainFn& g, double tol, CheckResult& sub,
                             CheckResult& mono) {
    std::vector<std::size_t> free;
    for (std::size_t k = 0; k < inst.dim(); ++k)
        if (!inst.pinned(k)) free.push_back(k);
    const std::size_t n = free.size();
    const std::size_t N = std::size_t{1} << n;
    std::vector<double> f(N);
    Allocation x = inst.catalog().omega();
    for (std::size_t mask = 0; mask < N; ++mask) {
        for (std::size_t b = 0; b < n; ++b) x[free[b]] = (mask >> b) & 1 ? 1.0 : 0.0;
        f[mask] = g(inst, d, x);
    }
    for (std::size_t big = 0; big < N; ++big) {
        for (std::size_t e = 0; e < n; ++e) {
            std::size_t bit = std::size_t{1} << e;
            if (big & bit) continue;
            double gain_big = f[big | bit] - f[big];
            ++mono.trials;
            if (gain_big < -detail::rel_tol(tol, f[big]))
                detail::note(mono, "adding coordinate " + std::to_string(free[e]) + " decreases the gain");
            // every subset of big
            for (std::size_t small = big;; small = (small - 1) & big) {
                double gain_small = f[small | bit] - f[small];
                ++sub.trials;
                if (gain_small < gain_big - detail::rel_tol(tol, f[big | bit]))
                    detail::note(sub, "marginal gain grows from subset " + std::to_string(small) + " to superset " +
                                          std::to_string(big));
                if (small == 0) break;
            }
        }
    }
}

/**
 * \brief Property suite on one instance: gain equivalence, sandwich, concavity,
 * supergradient inequality, message/central agreement, dual-norm bound and, for small
 * instances, exhaustive submodularity and monotonicity.
 */
template <class Rng>
CheckReport structural_checks(const Instance& inst, std::size_t samples, Rng& rng, const GainFunctions& fns = {},
                              const CheckOptions& opt = {}) {
    CheckReport rep;
    CheckResult eq{"gain-equivalence"}, sand{"sandwich"}, conc{"concavity"}, sup{"supergradient"},
        msg{"messages-equal-central"}, norm{"subgradient-bound"}, sub{"submodularity"}, mono{"monotonicity"};
    const double psi = 1.0 - 1.0 / std::exp(1.0);
    auto rc = regret_constants(inst, 1);
    for (std::size_t s = 0; s < samples; ++s) {
        SlotDemand d = random_demand(inst, rng, opt.max_batch);
        Allocation yb = random_box_point(inst, rng, s % 2 == 0);
        ++eq.trials;
        double a = fns.gain(inst, d, yb), b = fns.gain_compact(inst, d, yb);
        if (std::abs(a - b) > detail::rel_tol(opt.tolerance, a))
            detail::note(eq, "gain " + std::to_string(a) + " vs compact " + std::to_string(b) + " at " + detail::show(yb));

        Allocation y = random_simplex_point(inst, rng), y2 = random_simplex_point(inst, rng);
        double G = fns.gain(inst, d, y), G2 = fns.gain(inst, d, y2);
        double lam = fns.bounding(inst, d, y);
        ++sand.trials;
        if (lam > G + detail::rel_tol(opt.tolerance, G) || G > lam / psi + detail::rel_tol(opt.tolerance, G))
            detail::note(sand, "Lambda " + std::to_string(lam) + ", G " + std::to_string(G) + " at " + detail::show(y));

        Allocation mid(y.size());
        for (std::size_t k = 0; k < y.size(); ++k) mid[k] = 0.5 * (y[k] + y2[k]);
        ++conc.trials;
        double Gm = fns.gain(inst, d, mid);
        if (Gm < 0.5 * (G + G2) - detail::rel_tol(opt.tolerance, Gm))
            detail::note(conc, "midpoint below chord at " + detail::show(mid));

        auto sg = subgradient(inst, d, y);
        double lin = G;
        for (std::size_t k = 0; k < y.size(); ++k) lin += sg.g[k] * (y2[k] - y[k]);
        ++sup.trials;
        if (G2 > lin + detail::rel_tol(1e-8, G2))
            detail::note(sup, "G(y') " + std::to_string(G2) + " above linearisation " + std::to_string(lin));

        auto mg = subgradient_via_messages(inst, d, y);
        ++msg.trials;
        if (mg.grad.g != sg.g || mg.grad.kstar != sg.kstar) detail::note(msg, "component mismatch at " + detail::show(y));

        ++norm.trials;
        double dn = dual_norm(inst, sg.g);
        if (dn > rc.sigma * (1.0 + 1e-12)) detail::note(norm, "dual norm " + std::to_string(dn) + " above sigma");
    }
    std::size_t nfree = 0;
    for (std::size_t k = 0; k < inst.dim(); ++k) nfree += !inst.pinned(k);
    rep.results = {eq, sand, conc, sup, msg, norm};
    if (nfree <= opt.exhaustive_limit) {
        for (std::size_t s = 0; s < std::max<std::size_t>(1, samples / 10); ++s)
            check_submodular(inst, random_demand(inst, rng, opt.max_batch), fns.gain, opt.tolerance, sub, mono);
        rep.results.push_back(sub);
        rep.results.push_back(mono);
    }
    return rep;
}

}  // namespace infida
