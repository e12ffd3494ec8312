#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "mlpde/config.hpp"
#include "mlpde/harness.hpp"
#include "mlpde/problem.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Multilevel Picard solver for semilinear parabolic PDEs"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int threads = 1;
    bool check = false;
    bool regenerate = false;

    auto* run_cmd = app.add_subcommand("run", "Run an experiment");
    run_cmd->add_option("--config", config_path, "TOML or JSON experiment config")->required();
    auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the config seed");
    run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    run_cmd->add_flag("--assert", check, "Exit nonzero when a mode assertion fails");
    run_cmd->add_option("--out-dir", out_dir, "Output directory");

    auto* problems_cmd = app.add_subcommand("problems", "List built-in problems");

    auto* golden_cmd = app.add_subcommand("golden", "Write oracle reference values");
    golden_cmd->add_option("--config", config_path, "Experiment config")->required();
    golden_cmd->add_option("--out-dir", out_dir, "Output directory");
    golden_cmd->add_flag("--regenerate", regenerate, "Overwrite an existing golden file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*problems_cmd) {
            for (const auto& [id, text] : mlpde::builtin_problems())
                std::printf("%-22s %s\n", id.c_str(), text.c_str());
            return 0;
        }
        const mlpde::ExperimentConfig config = mlpde::load_config(config_path);
        if (*golden_cmd) {
            std::printf("%s\n", mlpde::write_oracle_golden(config, out_dir, regenerate).c_str());
            return 0;
        }
        mlpde::RunOptions options;
        options.threads = threads;
        options.check_assertions = check;
        options.out_dir = out_dir;
        if (*seed_opt) options.seed = seed;
        const mlpde::RunResult result = mlpde::run(config, options);
        for (const auto& r : result.records) {
            if (r.metric.empty()) continue;
            std::printf("%s n=%s K=%s %s=%s\n", r.problem.c_str(),
                        r.n ? std::to_string(*r.n).c_str() : "-",
                        r.K ? std::to_string(*r.K).c_str() : "-", r.metric.c_str(),
                        r.metric_value ? std::to_string(*r.metric_value).c_str() : "-");
        }
        for (const auto& e : result.estimator_failures) std::fprintf(stderr, "estimator: %s\n", e.c_str());
        for (const auto& a : result.assertion_failures) std::fprintf(stderr, "assertion: %s\n", a.c_str());
        return result.exit_code(check);
    } catch (const mlpde::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
