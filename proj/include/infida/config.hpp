#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "catalog.hpp"
#include "depround.hpp"
#include "error.hpp"
#include "instance.hpp"
#include "policy.hpp"
#include "topology.hpp"
#include "trace.hpp"
#include "workload.hpp"

namespace infida {

struct PolicyConfig {
    std::string name = "infida";  ///< infida | infida_offline | sg | olag | omega
    std::optional<double> eta;    ///< empty: regret-optimal rate for the horizon
    RefreshSchedule refresh = RefreshSchedule::fixed(1);
    double eps_min = 1e-12;
    RoundingMode rounding = RoundingMode::slack;
    bool messages = false;
    bool fractional_capacity = false;
    std::size_t offline_iterations = 100;
    std::optional<double> offline_eta;
    double olag_decay = 0.0;
    bool sg_lazy = true;
};

struct SimulationConfig {
    nlohmann::json topology;  ///< kept raw; resolved by build_instance
    std::string catalog_table = "builtin";
    int tasks = 20;
    int duplicates = 3;
    std::optional<Count> repository_capacity;
    bool pin_all_replicas = true;

    PopularityProfile profile;
    double rate_rps = 100.0;
    int origins_per_task = 2;
    std::string trace_file;

    PolicyConfig policy;

    double alpha = 1.0;
    double slot_seconds = 60.0;
    std::size_t horizon = 100;
    std::uint64_t seed = 0;
    std::string out_dir;

    nlohmann::json raw;  ///< the document as read, echoed into summaries
};

/// The two hierarchies used in the experiments, as tier lists.
inline nlohmann::json preset_topology(const std::string& name) {
    using nlohmann::json;
    if (name == "I")
        return json{{"tiers",
                     json::array({json{{"tier", 4}, {"count", 24}, {"budget_mb", 4096}, {"hardware", "gtx_980"}, {"uplink_latency_ms", 6}},
                                  json{{"tier", 3}, {"count", 6}, {"budget_mb", 8192}, {"hardware", "gtx_980"}, {"uplink_latency_ms", 6}},
                                  json{{"tier", 2}, {"count", 4}, {"budget_mb", 12288}, {"hardware", "gtx_980"}, {"uplink_latency_ms", 15}},
                                  json{{"tier", 1}, {"count", 1}, {"budget_mb", 16384}, {"hardware", "titan_rtx"}, {"uplink_latency_ms", 40}},
                                  json{{"tier", 0}, {"count", 1}, {"hardware", "titan_rtx"}}})}};
    if (name == "II")
        return json{{"tiers",
                     json::array({json{{"tier", 4}, {"count", 2}, {"budget_mb", 4096}, {"hardware", "gtx_980"}, {"uplink_latency_ms", 12}},
                                  json{{"tier", 2}, {"count", 1}, {"budget_mb", 12288}, {"hardware", "gtx_980"}, {"uplink_latency_ms", 15}},
                                  json{{"tier", 1}, {"count", 1}, {"budget_mb", 16384}, {"hardware", "titan_rtx"}, {"uplink_latency_ms", 40}},
                                  json{{"tier", 0}, {"count", 1}, {"hardware", "titan_rtx"}}})}};
    throw ConfigError("unknown topology preset '" + name + "'");
}

namespace detail {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T def) {
    if (!j.contains(key) || j.at(key).is_null()) return def;
    return j.at(key).get<T>();
}

inline RefreshSchedule parse_refresh(const nlohmann::json& j) {
    if (j.is_number_integer()) return RefreshSchedule::fixed(j.get<int>());
    if (j.contains("period")) return RefreshSchedule::fixed(j.at("period").get<int>());
    return RefreshSchedule::stretch(j.at("initial").get<int>(), j.at("target").get<int>(),
                                    j.at("stretch_slots").get<std::size_t>());
}

}  // namespace detail

inline SimulationConfig parse_config(const nlohmann::json& doc) {
    SimulationConfig c;
    c.raw = doc;
    try {
        if (!doc.is_object()) throw ConfigError("config must be a JSON object");
        for (auto it = doc.begin(); it != doc.end(); ++it)
            if (it.key() != "topology" && it.key() != "catalog" && it.key() != "workload" && it.key() != "policy" &&
                it.key() != "run")
                throw ConfigError("unknown config section '" + it.key() + "'");

        const auto& topo = doc.at("topology");
        c.topology = topo.contains("preset") ? preset_topology(topo.at("preset").get<std::string>()) : topo;

        nlohmann::json cat = doc.value("catalog", nlohmann::json::object());
        c.catalog_table = detail::get_or<std::string>(cat, "table", "builtin");
        c.tasks = detail::get_or<int>(cat, "tasks", 20);
        c.duplicates = detail::get_or<int>(cat, "duplicates", 3);
        if (cat.contains("repository_capacity") && !cat.at("repository_capacity").is_null())
            c.repository_capacity = cat.at("repository_capacity").get<Count>();
        c.pin_all_replicas = detail::get_or<bool>(cat, "pin_all_replicas", true);

        nlohmann::json wl = doc.value("workload", nlohmann::json::object());
        std::string kind = detail::get_or<std::string>(wl, "profile", "fixed");
        if (kind == "fixed")
            c.profile.kind = ProfileKind::fixed;
        else if (kind == "sliding")
            c.profile.kind = ProfileKind::sliding;
        else
            throw ConfigError("unknown popularity profile '" + kind + "'");
        c.profile.tasks = c.tasks;
        c.profile.exponent = detail::get_or<double>(wl, "exponent", 1.2);
        c.profile.window = detail::get_or<double>(wl, "window", 2.7e7);
        c.profile.shift = detail::get_or<int>(wl, "shift", 5);
        c.rate_rps = detail::get_or<double>(wl, "rate_rps", 100.0);
        c.origins_per_task = detail::get_or<int>(wl, "origins_per_task", 2);
        c.trace_file = detail::get_or<std::string>(wl, "trace", "");

        nlohmann::json pol = doc.value("policy", nlohmann::json::object());
        c.policy.name = detail::get_or<std::string>(pol, "name", "infida");
        if (pol.contains("eta") && !(pol.at("eta").is_string() && pol.at("eta").get<std::string>() == "auto"))
            c.policy.eta = pol.at("eta").get<double>();
        if (pol.contains("refresh")) c.policy.refresh = detail::parse_refresh(pol.at("refresh"));
        c.policy.eps_min = detail::get_or<double>(pol, "eps_min", 1e-12);
        std::string rounding = detail::get_or<std::string>(pol, "rounding", "slack");
        if (rounding == "slack")
            c.policy.rounding = RoundingMode::slack;
        else if (rounding == "strict")
            c.policy.rounding = RoundingMode::strict;
        else
            throw ConfigError("unknown rounding mode '" + rounding + "'");
        std::string sg = detail::get_or<std::string>(pol, "subgradient", "central");
        if (sg != "central" && sg != "messages") throw ConfigError("unknown subgradient mode '" + sg + "'");
        c.policy.messages = sg == "messages";
        std::string cap = detail::get_or<std::string>(pol, "capacity", "integral");
        if (cap != "integral" && cap != "fractional") throw ConfigError("unknown capacity mode '" + cap + "'");
        c.policy.fractional_capacity = cap == "fractional";
        c.policy.offline_iterations = detail::get_or<std::size_t>(pol, "offline_iterations", 100);
        if (pol.contains("offline_eta") && !pol.at("offline_eta").is_null())
            c.policy.offline_eta = pol.at("offline_eta").get<double>();
        c.policy.olag_decay = detail::get_or<double>(pol, "olag_decay", 0.0);
        c.policy.sg_lazy = detail::get_or<bool>(pol, "sg_lazy", true);

        const auto& run = doc.at("run");
        if (!run.contains("seed")) throw ConfigError("run.seed is mandatory");
        c.seed = run.at("seed").get<std::uint64_t>();
        c.alpha = detail::get_or<double>(run, "alpha", 1.0);
        c.slot_seconds = detail::get_or<double>(run, "slot_seconds", 60.0);
        c.horizon = detail::get_or<std::size_t>(run, "horizon", 100);
        c.out_dir = detail::get_or<std::string>(run, "out", "");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const auto& n = c.policy.name;
    if (n != "infida" && n != "infida_offline" && n != "sg" && n != "olag" && n != "omega")
        throw ConfigError("unknown policy '" + n + "'");
    if (c.policy.eta && !(*c.policy.eta >= 0.0)) throw ConfigError("eta must be non-negative");
    if (c.policy.olag_decay < 0.0 || c.policy.olag_decay > 1.0) throw ConfigError("olag_decay must be within [0,1]");
    if (!(c.slot_seconds > 0.0)) throw ConfigError("slot_seconds must be positive");
    if (!(c.alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
    try {
        c.policy.refresh.validate();
        c.profile.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline SimulationConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(doc);
}

inline CatalogTable resolve_table(const SimulationConfig& c) {
    if (c.catalog_table == "builtin") return builtin_table();
    std::ifstream in(c.catalog_table);
    if (!in) throw ConfigError("cannot read catalog table " + c.catalog_table);
    return parse_catalog_csv(in);
}

/**
 * \brief Topology, catalog and request types from a config. Tier-0 nodes without a budget
 * are sized to hold the whole catalog. Explicit graphs may list "paths" (node sequences,
 * one per origin) and "types" ({task, path}); otherwise types are assigned per task to
 * random base stations.
 */
inline Instance build_instance(const SimulationConfig& c) {
    try {
        const auto& t = c.topology;
        Topology topo;
        if (t.contains("tiers")) {
            std::vector<TierSpec> tiers;
            for (const auto& jt : t.at("tiers")) {
                TierSpec s;
                s.tier = jt.at("tier").get<int>();
                s.count = jt.value("count", 1);
                s.hardware = jt.at("hardware").get<std::string>();
                s.uplink_latency_ms = jt.value("uplink_latency_ms", 0.0);
                if (jt.contains("budget_mb") && !jt.at("budget_mb").is_null())
                    s.budget_mb = jt.at("budget_mb").get<double>();
                else if (jt.contains("budget_gb") && !jt.at("budget_gb").is_null())
                    s.budget_mb = jt.at("budget_gb").get<double>() * 1024.0;
                else
                    s.budget_mb = std::numeric_limits<double>::infinity();
                tiers.push_back(s);
            }
            topo = build_hierarchical_topology(tiers);
        } else {
            topo = topology_from_json(t);
        }
        std::vector<std::string> hw;
        std::vector<NodeId> repos;
        for (const auto& n : topo.nodes()) {
            hw.push_back(n.hardware);
            if (n.tier == 0) repos.push_back(n.id);
        }
        CatalogOptions co;
        co.tasks = c.tasks;
        co.duplicates = c.duplicates;
        co.slot_seconds = c.slot_seconds;
        co.alpha = c.alpha;
        co.repository_capacity = c.repository_capacity;
        co.pin_all_replicas = c.pin_all_replicas;
        Catalog cat = load_catalog(resolve_table(c), hw, repos, co);
        for (const auto& n : topo.nodes())
            if (std::isinf(n.budget_mb)) topo.set_budget(n.id, cat.total_size(n.id));

        std::vector<RequestPath> paths;
        std::vector<RequestType> types;
        if (t.contains("paths")) {
            for (const auto& jp : t.at("paths")) paths.emplace_back(topo, jp.get<std::vector<NodeId>>());
            if (t.contains("types")) {
                for (const auto& jt : t.at("types")) types.push_back({jt.at("task").get<TaskId>(), jt.at("path").get<int>()});
            } else {
                for (std::size_t i = 0; i < cat.num_tasks(); ++i)
                    for (std::size_t p = 0; p < paths.size(); ++p) types.push_back({static_cast<TaskId>(i), static_cast<int>(p)});
            }
        } else {
            std::mt19937_64 rng(mix_seed(c.seed, 0x7e));
            std::tie(paths, types) = assign_request_types(topo, cat, c.origins_per_task, rng);
        }
        return Instance(std::move(topo), std::move(cat), std::move(paths), std::move(types), c.alpha);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("topology: ") + e.what());
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
}

/// The horizon's batches, generated from the profile or read from the configured trace file.
inline Trace build_trace(const SimulationConfig& c, const Instance& inst) {
    if (!c.trace_file.empty()) {
        Trace t = load_trace(c.trace_file);
        if (t.size() > c.horizon) t.resize(c.horizon);
        return t;
    }
    WorkloadGenerator gen(inst, c.profile, requests_per_slot(c.rate_rps, c.slot_seconds), mix_seed(c.seed, 0x10ad));
    Trace t;
    t.reserve(c.horizon);
    for (std::size_t s = 0; s < c.horizon; ++s) t.push_back(to_trace_slot(inst, gen.next()));
    return t;
}

}  // namespace infida
