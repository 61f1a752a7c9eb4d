#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"

using namespace infida;

namespace {

nlohmann::json small_config(const std::string& policy) {
    return nlohmann::json::parse(R"({
        "topology": {"preset": "II"},
        "catalog": {"tasks": 2, "duplicates": 1},
        "workload": {"profile": "sliding", "rate_rps": 2, "window": 500, "shift": 1},
        "policy": {"name": ")" + policy + R"(", "eta": 0.0005, "refresh": 2, "offline_iterations": 5},
        "run": {"seed": 3, "horizon": 15, "alpha": 1.0}
    })");
}

std::string csv_of(const SimulationResult& r) {
    std::ostringstream os;
    write_metrics_csv(os, r);
    return os.str();
}

}  // namespace

TEST(Metrics, NtagAndMu) {
    EXPECT_DOUBLE_EQ(ntag({320.0}, {10}), 32.0);
    EXPECT_DOUBLE_EQ(ntag({320.0, 5.0}, {10, 0}), 16.0);
    EXPECT_DOUBLE_EQ(ntag({}, {}), 0.0);
    std::vector<double> sizes{100.0, 7.0};
    Allocation a{0, 1}, b{1, 1};
    EXPECT_DOUBLE_EQ(model_updates({a, b}, sizes), 50.0);
    EXPECT_DOUBLE_EQ(model_updates({b, a}, sizes), 0.0);
    EXPECT_DOUBLE_EQ(model_updates({a, a, a}, sizes), 0.0);
    auto m = compute_metrics({320.0, 0.0}, {10, 10}, {a, b}, sizes);
    EXPECT_DOUBLE_EQ(m.ntag, 16.0);
    EXPECT_DOUBLE_EQ(m.mu, 50.0);
    EXPECT_THROW(ntag({1.0}, {}), ValidationError);
}

TEST(BruteForce, HandExample) {
    auto inst = fixture::two_node();
    Trace trace{fixture::slot_of(inst, {10})};
    auto opt = brute_force_static_opt(inst, trace);
    EXPECT_DOUBLE_EQ(opt.gain, 320.0);
    EXPECT_EQ(opt.x[inst.index(0, 0)], 1.0);
    EXPECT_EQ(opt.x[inst.index(0, 1)], 0.0);
}

TEST(BruteForce, OnlyOmegaFeasible) {
    auto inst = fixture::two_node(0.0);
    Trace trace{fixture::slot_of(inst, {10})};
    auto opt = brute_force_static_opt(inst, trace);
    EXPECT_EQ(opt.gain, 0.0);
    EXPECT_EQ(opt.x, inst.catalog().omega());
}

TEST(BruteForce, RefusesLargeInstances) {
    auto inst = fixture::two_node();
    Trace trace{fixture::slot_of(inst, {10})};
    try {
        brute_force_static_opt(inst, trace, 2);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("3 free coordinates"), std::string::npos);
    }
}

TEST(BruteForce, EnumeratesAllSubsets) {
    auto inst = fixture::two_node(2.0);
    std::size_t n = 0;
    for_each_feasible(inst, [&](const Allocation&) { ++n; });
    EXPECT_EQ(n, 8u);  // node 0: 4 subsets of two unit models, node 1: 2
}

TEST(Simulation, EmptyHorizon) {
    auto inst = fixture::two_node();
    StaticPolicy p("omega", inst.catalog().omega());
    auto r = simulate(inst, {}, p);
    EXPECT_TRUE(r.records.empty());
    EXPECT_EQ(r.metrics.ntag, 0.0);
}

TEST(Simulation, OmegaHasNoGainNoUpdates) {
    auto c = parse_config(small_config("omega"));
    auto out = run_simulation(c);
    ASSERT_EQ(out.result.records.size(), 15u);
    EXPECT_EQ(out.result.metrics.ntag, 0.0);
    EXPECT_EQ(out.result.metrics.mu, 0.0);
}

TEST(Simulation, HandExampleRecords) {
    auto inst = fixture::two_node();
    auto x = inst.catalog().omega();
    x[inst.index(0, 0)] = 1.0;
    StaticPolicy p("fixed", x);
    Trace trace{fixture::slot_of(inst, {10}, 1), fixture::slot_of(inst, {0}, 2)};
    auto r = simulate(inst, trace, p);
    ASSERT_EQ(r.records.size(), 2u);
    EXPECT_DOUBLE_EQ(r.records[0].gain, 320.0);
    EXPECT_DOUBLE_EQ(r.records[0].ntag, 32.0);
    EXPECT_DOUBLE_EQ(r.records[1].ntag, 16.0);
    EXPECT_DOUBLE_EQ(r.records[0].avg_latency_ms, 68.0);  // (4*20 + 6*100) / 10
    EXPECT_DOUBLE_EQ(r.records[0].avg_inaccuracy, 0.0);
    EXPECT_DOUBLE_EQ(r.records[1].fetched_mb, 0.0);
    ASSERT_EQ(r.tiers, (std::vector<int>{0, 1}));
    EXPECT_DOUBLE_EQ(r.records[0].tier_mb[1], 1.0);
    EXPECT_DOUBLE_EQ(r.records[0].tier_mb[0], 1.0);
}

TEST(Simulation, SameSeedIsBitIdentical) {
    for (std::string pol : {"infida", "olag", "sg", "infida_offline"}) {
        auto c = parse_config(small_config(pol));
        auto a = run_simulation(c), b = run_simulation(c);
        EXPECT_EQ(csv_of(a.result), csv_of(b.result)) << pol;
        EXPECT_EQ(a.summary.dump(), b.summary.dump()) << pol;
    }
    auto c = parse_config(small_config("infida"));
    auto d = c;
    d.seed = 4;
    EXPECT_NE(csv_of(run_simulation(c).result), csv_of(run_simulation(d).result));
}

TEST(Simulation, SummaryContents) {
    auto c = parse_config(small_config("infida"));
    auto out = run_simulation(c);
    const auto& s = out.summary;
    EXPECT_EQ(s["metrics_schema"], "v1");
    EXPECT_EQ(s["run_id"].get<std::string>().size(), 16u);
    EXPECT_EQ(s["config"]["run"]["seed"], 3);
    EXPECT_GT(s["regret"]["A"].get<double>(), 0.0);
    EXPECT_NEAR(s["regret"]["bound_per_slot"].get<double>(), out.constants.A / std::sqrt(15.0), 1e-9);
    EXPECT_GE(s["mu"].get<double>(), 0.0);
    auto csv = csv_of(out.result);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "t,gain,ntag,mu,fetched_mb,avg_latency_ms,avg_inaccuracy,alloc_mb_tier0,alloc_mb_tier1,alloc_mb_tier2,"
              "alloc_mb_tier4");
}

TEST(Simulation, WritesOutputs) {
    auto dir = std::filesystem::temp_directory_path() / "infida_harness_out";
    std::filesystem::remove_all(dir);
    auto out = run_simulation(parse_config(small_config("olag")));
    write_outputs(dir.string(), out);
    EXPECT_TRUE(std::filesystem::exists(dir / "metrics.csv"));
    std::ifstream in(dir / "summary.json");
    auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["policy"], "olag");
    std::filesystem::remove_all(dir);
}

TEST(Simulation, TraceReplayMatchesGeneration) {
    auto c = parse_config(small_config("infida"));
    auto inst = build_instance(c);
    auto trace = build_trace(c, inst);
    auto path = std::filesystem::temp_directory_path() / "infida_replay.csv";
    save_trace(path.string(), trace);
    auto c2 = c;
    c2.trace_file = path.string();
    EXPECT_EQ(csv_of(run_simulation(c).result), csv_of(run_simulation(c2).result));
    std::filesystem::remove(path);
}

TEST(Config, Validation) {
    auto j = small_config("infida");
    j["run"].erase("seed");
    EXPECT_THROW(parse_config(j), ConfigError);
    j = small_config("nonsense");
    EXPECT_THROW(parse_config(j), ConfigError);
    j = small_config("infida");
    j["extra"] = 1;
    EXPECT_THROW(parse_config(j), ConfigError);
    j = small_config("infida");
    j["topology"] = {{"preset", "III"}};
    EXPECT_THROW(parse_config(j), ConfigError);
    j = small_config("infida");
    j["policy"]["refresh"] = {{"initial", 2}, {"target", 8}, {"stretch_slots", 100}};
    auto c = parse_config(j);
    EXPECT_EQ(c.policy.refresh.target, 8);
    j["policy"]["eta"] = "auto";
    EXPECT_FALSE(parse_config(j).policy.eta.has_value());
}

TEST(Config, PresetTwoShape) {
    auto c = parse_config(small_config("omega"));
    auto inst = build_instance(c);
    EXPECT_EQ(inst.num_nodes(), 5u);
    EXPECT_EQ(inst.topology().base_stations().size(), 2u);
    EXPECT_EQ(inst.num_models(), 20u);
    EXPECT_EQ(inst.num_types(), 4u);
    EXPECT_DOUBLE_EQ(inst.budget(4), inst.catalog().total_size(4));
}

TEST(Config, InfeasibleRepositoryIsReported) {
    auto j = small_config("omega");
    j["catalog"]["repository_capacity"] = 1;
    j["workload"]["rate_rps"] = 50;
    auto c = parse_config(j);
    EXPECT_THROW(run_simulation(c), InfeasibleError);
}
