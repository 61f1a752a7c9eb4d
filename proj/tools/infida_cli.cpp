#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <random>

#include <infida/infida.hpp>

namespace {

enum Exit { ok = 0, usage = 1, config_error = 2, infeasible = 3, check_failed = 4 };

infida::SimulationConfig load(const std::string& path, const std::optional<std::uint64_t>& seed,
                              const std::string& policy) {
    auto c = infida::load_config(path);
    if (seed) {
        c.seed = *seed;
        c.raw["run"]["seed"] = *seed;
    }
    if (!policy.empty()) {
        auto j = c.raw;
        j["policy"]["name"] = policy;
        auto s = c.seed;
        c = infida::parse_config(j);
        c.seed = s;
    }
    return c;
}

void print_report(const infida::CheckReport& rep) {
    for (const auto& r : rep.results) {
        std::printf("%-24s %s  trials=%zu violations=%zu\n", r.name.c_str(), r.passed() ? "PASS" : "FAIL", r.trials,
                    r.violations);
        if (!r.passed()) std::printf("    first counterexample: %s\n", r.counterexample.c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online model allocation for inference delivery networks"};
    app.require_subcommand(1);

    std::string config, out, policy;
    std::optional<std::uint64_t> seed;

    auto* sim = app.add_subcommand("simulate", "run a configured simulation");
    sim->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
    sim->add_option("--seed", seed, "override run.seed");
    sim->add_option("--out", out, "output directory (default: run.out)");
    sim->add_option("--policy", policy, "override policy.name");

    auto* tr = app.add_subcommand("trace", "generate the configured workload and save it");
    tr->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
    tr->add_option("--seed", seed, "override run.seed");
    tr->add_option("--out", out, "trace file")->required();

    std::size_t samples = 200, instances = 20;
    auto* chk = app.add_subcommand("check", "property checks on random small instances");
    chk->add_option("--seed", seed, "rng seed");
    chk->add_option("--instances", instances, "number of random instances");
    chk->add_option("--samples", samples, "samples per instance");

    auto* opt = app.add_subcommand("opt", "exhaustive static optimum for a tiny config");
    opt->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
    opt->add_option("--seed", seed, "override run.seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            auto c = load(config, seed, policy);
            if (!out.empty()) c.out_dir = out;
            auto res = infida::run_simulation(c);
            if (!c.out_dir.empty()) infida::write_outputs(c.out_dir, res);
            std::printf("policy=%s slots=%zu ntag=%.6f mu=%.3f run_id=%s\n", res.result.policy.c_str(),
                        res.result.records.size(), res.result.metrics.ntag, res.result.metrics.mu,
                        res.summary["run_id"].get<std::string>().c_str());
            return ok;
        }
        if (tr->parsed()) {
            auto c = load(config, seed, "");
            c.trace_file.clear();
            auto inst = infida::build_instance(c);
            infida::save_trace(out, infida::build_trace(c, inst));
            std::printf("wrote %zu slots to %s\n", c.horizon, out.c_str());
            return ok;
        }
        if (chk->parsed()) {
            std::mt19937_64 rng(seed.value_or(1));
            bool all = true;
            for (std::size_t i = 0; i < instances; ++i) {
                auto inst = infida::random_instance(rng);
                auto rep = infida::structural_checks(inst, samples, rng);
                if (!rep.passed()) {
                    std::printf("instance %zu:\n", i);
                    print_report(rep);
                    all = false;
                }
            }
            std::printf("%s on %zu instances\n", all ? "all checks passed" : "checks FAILED", instances);
            return all ? ok : check_failed;
        }
        if (opt->parsed()) {
            auto c = load(config, seed, "");
            auto inst = infida::build_instance(c);
            auto trace = infida::build_trace(c, inst);
            auto best = infida::brute_force_static_opt(inst, trace);
            std::printf("optimal time-averaged gain %.9g over %zu allocations\n", best.gain, best.evaluated);
            for (std::size_t k = 0; k < best.x.size(); ++k)
                if (best.x[k] == 1.0 && !inst.pinned(k))
                    std::printf("  node %zu model %zu\n", k / inst.num_models(), k % inst.num_models());
            return ok;
        }
    } catch (const infida::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const infida::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return infeasible;
    } catch (const infida::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return config_error;
    } catch (const infida::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return config_error;
    }
    return usage;
}
