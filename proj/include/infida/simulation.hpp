#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "baselines.hpp"
#include "config.hpp"
#include "metrics.hpp"
#include "policy.hpp"
#include "serving.hpp"
#include "trace.hpp"

namespace infida {

/** \brief Allocation policy driven by the slot loop. */
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual const Allocation& allocation() const = 0;
    /// End of slot; `s` is the schedule served with allocation(), `d` the demand with final l.
    virtual void end_slot(const SlotDemand& d, const Schedule& s) = 0;
    virtual nlohmann::json info() const { return nlohmann::json::object(); }
};

class StaticPolicy : public Policy {
public:
    StaticPolicy(std::string name, Allocation x, nlohmann::json info = nlohmann::json::object())
        : name_(std::move(name)), x_(std::move(x)), info_(std::move(info)) {}
    std::string name() const override { return name_; }
    const Allocation& allocation() const override { return x_; }
    void end_slot(const SlotDemand&, const Schedule&) override {}
    nlohmann::json info() const override { return info_; }

private:
    std::string name_;
    Allocation x_;
    nlohmann::json info_;
};

class OnlineInfida : public Policy {
public:
    OnlineInfida(const Instance& inst, InfidaOptions opt) : p_(inst, opt) {}
    std::string name() const override { return "infida"; }
    const Allocation& allocation() const override { return p_.integral(); }
    void end_slot(const SlotDemand& d, const Schedule&) override {
        p_.step(d);
        max_norm_ = std::max(max_norm_, p_.last_dual_norm());
    }
    nlohmann::json info() const override {
        nlohmann::json j{{"refreshes", p_.refreshes()}, {"max_dual_norm", max_norm_}};
        const auto& m = p_.message_stats();
        if (m.messages)
            j["messages"] = {{"created", m.messages},
                             {"upstream_hops", m.upstream_hops},
                             {"downstream_hops", m.downstream_hops},
                             {"max_pending", m.max_pending}};
        return j;
    }
    const InfidaPolicy& inner() const { return p_; }

private:
    InfidaPolicy p_;
    double max_norm_ = 0.0;
};

class OnlineOlag : public Policy {
public:
    OnlineOlag(const Instance& inst, OlagOptions opt) : p_(inst, opt) {}
    std::string name() const override { return "olag"; }
    const Allocation& allocation() const override { return p_.integral(); }
    void end_slot(const SlotDemand& d, const Schedule& s) override { p_.observe(d.r, s); }

private:
    OlagPolicy p_;
};

struct SlotRecord {
    std::size_t t = 0;
    Count requests = 0;
    double gain = 0.0;
    double ntag = 0.0;
    double mu = 0.0;
    double fetched_mb = 0.0;
    double avg_latency_ms = 0.0;
    double avg_inaccuracy = 0.0;
    std::vector<double> tier_mb;
};

struct SimulationResult {
    std::string policy;
    std::vector<int> tiers;
    std::vector<SlotRecord> records;
    RunMetrics metrics;
    double avg_latency_ms = 0.0;   ///< request-weighted over the run
    double avg_inaccuracy = 0.0;   ///< request-weighted over the run
    nlohmann::json policy_info;
};

/**
 * \brief The slot loop: serve the batch with the current allocation, derive l from the
 * scheduler (then trace overrides), record metrics, let the policy update.
 */
inline SimulationResult simulate(const Instance& inst, const Trace& trace, Policy& policy) {
    SimulationResult res;
    res.policy = policy.name();
    std::map<int, std::size_t> tier_col;
    for (const auto& n : inst.topology().nodes()) tier_col.emplace(n.tier, 0);
    for (auto& [tier, col] : tier_col) {
        col = res.tiers.size();
        res.tiers.push_back(tier);
    }
    std::vector<double> sizes(inst.dim());
    for (std::size_t k = 0; k < sizes.size(); ++k) sizes[k] = inst.size(k);
    const std::size_t M = inst.num_models();

    Allocation prev;
    double ntag_sum = 0.0, fetched_sum = 0.0, lat_sum = 0.0, inacc_sum = 0.0;
    Count req_sum = 0;
    for (std::size_t t = 0; t < trace.size(); ++t) {
        const Allocation& x = policy.allocation();
        auto r = batch_counts(inst, trace[t]);
        Schedule s = schedule_slot(inst, x, r);
        apply_overrides(inst, trace[t], s.l);
        SlotDemand d{r, s.l};
        SlotRecord rec;
        rec.t = t + 1;
        for (Count c : r) rec.requests += c;
        rec.gain = gain_compact(inst, d, x);
        double lat = 0.0, inacc = 0.0;
        for (std::size_t rho = 0; rho < inst.num_types(); ++rho) {
            const auto& rk = inst.ranking(rho);
            const auto& path = inst.path_of(rho);
            for (std::size_t k = 0; k < rk.size(); ++k) {
                double q = s.load[rho][k];
                if (q <= 0.0) continue;
                const auto& e = rk.entries[k];
                lat += q * (path.prefix_latency(e.position) + inst.catalog().entry(e.index).delay_ms);
                inacc += q * 100.0 * (1.0 - inst.catalog().model(e.model).accuracy);
            }
        }
        if (rec.requests > 0) {
            rec.avg_latency_ms = lat / static_cast<double>(rec.requests);
            rec.avg_inaccuracy = inacc / static_cast<double>(rec.requests);
            ntag_sum += rec.gain / static_cast<double>(rec.requests);
        }
        lat_sum += lat;
        inacc_sum += inacc;
        req_sum += rec.requests;
        rec.fetched_mb = t == 0 ? 0.0 : fetched_mb(prev, x, sizes);
        fetched_sum += rec.fetched_mb;
        rec.ntag = ntag_sum / static_cast<double>(t + 1);
        rec.mu = fetched_sum / static_cast<double>(t + 1);
        rec.tier_mb.assign(res.tiers.size(), 0.0);
        for (std::size_t k = 0; k < x.size(); ++k)
            if (x[k] > 0.0) rec.tier_mb[tier_col[inst.topology().node(static_cast<NodeId>(k / M)).tier]] += sizes[k] * x[k];
        res.records.push_back(std::move(rec));
        prev = x;
        policy.end_slot(d, s);
    }
    if (!res.records.empty()) {
        res.metrics.ntag = res.records.back().ntag;
        res.metrics.mu = res.records.back().mu;
    }
    if (req_sum > 0) {
        res.avg_latency_ms = lat_sum / static_cast<double>(req_sum);
        res.avg_inaccuracy = inacc_sum / static_cast<double>(req_sum);
    }
    res.policy_info = policy.info();
    return res;
}

/// Instantiates the configured policy; offline ones are optimised on the whole trace first.
inline std::unique_ptr<Policy> make_policy(const SimulationConfig& c, const Instance& inst, const Trace& trace) {
    const auto& p = c.policy;
    std::uint64_t seed = mix_seed(c.seed, 0x9011c7);
    if (p.name == "infida") {
        InfidaOptions o;
        o.eta = p.eta ? *p.eta : regret_constants(inst, std::max<std::size_t>(1, trace.size())).eta_star;
        o.refresh = p.refresh;
        o.eps_min = p.eps_min;
        o.rounding = p.rounding;
        o.use_messages = p.messages;
        o.fractional_capacity = p.fractional_capacity;
        o.seed = seed;
        return std::make_unique<OnlineInfida>(inst, o);
    }
    if (p.name == "olag") return std::make_unique<OnlineOlag>(inst, OlagOptions{p.olag_decay});
    if (p.name == "sg") {
        auto g = static_greedy(inst, trace, GreedyOptions{p.sg_lazy});
        return std::make_unique<StaticPolicy>(
            "sg", g.x, nlohmann::json{{"selected", g.order.size()}, {"all_served_off_repository", g.all_served_off_repository}});
    }
    if (p.name == "infida_offline") {
        OfflineOptions o;
        o.iterations = p.offline_iterations;
        o.eta = p.offline_eta ? *p.offline_eta : (p.eta ? *p.eta : 0.0);
        o.eps_min = p.eps_min;
        o.rounding = p.rounding;
        o.seed = seed;
        auto r = infida_offline(inst, trace, o);
        return std::make_unique<StaticPolicy>("infida_offline", r.x, nlohmann::json{{"iterations", o.iterations}});
    }
    if (p.name == "omega") return std::make_unique<StaticPolicy>("omega", inst.catalog().omega());
    throw ConfigError("unknown policy '" + p.name + "'");
}

/// 64-bit FNV-1a of the canonical config dump, as 16 hex digits.
inline std::string run_id(const nlohmann::json& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

struct RunOutput {
    SimulationResult result;
    RegretConstants constants;
    nlohmann::json summary;
};

inline nlohmann::json summarize(const SimulationConfig& c, const Instance& inst, const SimulationResult& r,
                                const RegretConstants& rc) {
    nlohmann::json cfg = c.raw;
    if (cfg.is_object()) {
        cfg["policy"]["name"] = c.policy.name;
        cfg["run"]["seed"] = c.seed;
    }
    std::size_t T = r.records.size();
    nlohmann::json j;
    j["metrics_schema"] = "v1";
    j["run_id"] = run_id(cfg);
    j["config"] = cfg;
    j["policy"] = r.policy;
    j["slots"] = T;
    j["nodes"] = inst.num_nodes();
    j["models"] = inst.num_models();
    j["request_types"] = inst.num_types();
    j["ntag"] = r.metrics.ntag;
    j["mu"] = r.metrics.mu;
    j["avg_latency_ms"] = r.avg_latency_ms;
    j["avg_inaccuracy"] = r.avg_inaccuracy;
    j["regret"] = {{"theta", rc.theta}, {"sigma", rc.sigma}, {"d_max", rc.d_max}, {"A", rc.A},
                   {"eta_star", rc.eta_star}, {"delta_c", rc.delta_c}, {"l_max", rc.l_max},
                   {"bound_per_slot", T ? rc.A / std::sqrt(static_cast<double>(T)) : 0.0}};
    j["policy_info"] = r.policy_info;
    return j;
}

inline RunOutput run_simulation(const SimulationConfig& c) {
    Instance inst = build_instance(c);
    Trace trace = build_trace(c, inst);
    auto policy = make_policy(c, inst, trace);
    RunOutput out;
    out.result = simulate(inst, trace, *policy);
    out.constants = regret_constants(inst, std::max<std::size_t>(1, trace.size()));
    out.summary = summarize(c, inst, out.result, out.constants);
    return out;
}

inline void write_metrics_csv(std::ostream& os, const SimulationResult& r) {
    os << "t,gain,ntag,mu,fetched_mb,avg_latency_ms,avg_inaccuracy";
    for (int tier : r.tiers) os << ",alloc_mb_tier" << tier;
    os << '\n';
    os << std::setprecision(17);
    for (const auto& rec : r.records) {
        os << rec.t << ',' << rec.gain << ',' << rec.ntag << ',' << rec.mu << ',' << rec.fetched_mb << ','
           << rec.avg_latency_ms << ',' << rec.avg_inaccuracy;
        for (double v : rec.tier_mb) os << ',' << v;
        os << '\n';
    }
}

inline void write_outputs(const std::string& dir, const RunOutput& out) {
    std::filesystem::create_directories(dir);
    std::ofstream m(std::filesystem::path(dir) / "metrics.csv");
    if (!m) throw ValidationError("cannot write into " + dir);
    write_metrics_csv(m, out.result);
    std::ofstream s(std::filesystem::path(dir) / "summary.json");
    s << out.summary.dump(2) << '\n';
}

}  // namespace infida
