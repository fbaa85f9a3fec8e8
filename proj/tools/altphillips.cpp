#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "altphillips/experiment.hpp"
#include "altphillips/parallel.hpp"
#include "altphillips/verify.hpp"
#include "altphillips/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitVerifyFailed = 4;

std::string resolve_out_dir(const std::string& flag_value, const ap::ExperimentConfig& cfg) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("ALTPHILLIPS_OUT"); env && *env)
        return std::string(env) + "/" + cfg.name;
    return cfg.output_dir;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for the fully nonlinear Alt-Phillips free boundary "
                 "problem F(D^2 u) = u^{gamma-1}, u >= 0"};
    app.set_version_flag("--version", std::string("altphillips ") + ap::kVersion);
    app.require_subcommand(1);

    int threads = 1;
    std::uint64_t seed = 42;
    app.add_option("--threads", threads, "worker threads (speed only, never results)")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "seed for ellipticity_check sampling");

    std::string run_config, run_out;
    auto* run = app.add_subcommand("run", "solve one experiment and write its artifacts");
    run->add_option("config", run_config, "experiment config (JSON)")->required();
    run->add_option("--out", run_out, "output directory override");

    std::string conv_config, conv_out;
    int levels = 2;
    auto* conv = app.add_subcommand("convergence", "grid refinement study (n -> 2n-1)");
    conv->add_option("config", conv_config, "experiment config (JSON)")->required();
    conv->add_option("--levels", levels, "refinement levels (>= 2)")->required();
    conv->add_option("--out", conv_out, "output directory override");

    auto* verify = app.add_subcommand("verify", "run the acceptance suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }
    ap::set_thread_count(threads);

    try {
        if (*run) {
            const ap::ExperimentConfig cfg = ap::load_config(run_config);
            const auto result = ap::run_experiment(cfg, resolve_out_dir(run_out, cfg), seed);
            if (!result.solve.converged) {
                std::cerr << "solve did not converge within " << cfg.knobs.max_outer
                          << " outer iterations (artifacts written, converged=false)\n";
                return kExitNoConvergence;
            }
            return kExitOk;
        }
        if (*conv) {
            const ap::ExperimentConfig cfg = ap::load_config(conv_config);
            if (levels < 2) {
                std::cerr << "convergence requires --levels >= 2\n";
                return kExitConfig;
            }
            const auto table =
                ap::convergence_study(cfg, levels, resolve_out_dir(conv_out, cfg), seed);
            std::cout << ap::format_convergence_table(table);
            for (const auto& row : table.rows)
                if (!row.converged) return kExitNoConvergence;
            return kExitOk;
        }
        if (*verify) {
            const bool ok = ap::verify_suite(std::cout);
            return ok ? kExitOk : kExitVerifyFailed;
        }
    } catch (const ap::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
