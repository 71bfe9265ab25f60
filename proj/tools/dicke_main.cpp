#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dicke/config.hpp"
#include "dicke/output.hpp"
#include "dicke/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitValidation = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string seed;
    int workers = -1;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* opt = cmd->add_option("--config", args.config_path, "run configuration file");
    if (config_required) opt->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides output.dir)");
    cmd->add_option("--seed", args.seed, "base seed (overrides seed)");
    cmd->add_option("--workers", args.workers, "worker thread count (overrides workers)");
    cmd->add_option("--override", args.overrides, "repeatable key=value override");
}

int load_config(const CommonArgs& args, dicke::RunConfig& cfg) {
    std::ifstream in(args.config_path);
    if (!in) {
        std::cerr << "error: cannot read config file '" << args.config_path << "'\n";
        return kExitConfig;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const dicke::ParseResult parsed = dicke::parse_config(buf.str());
    if (!parsed.ok()) {
        for (const auto& issue : parsed.errors) {
            if (issue.line > 0)
                std::cerr << args.config_path << ":" << issue.line << ": " << issue.message
                          << "\n";
            else
                std::cerr << args.config_path << ": " << issue.message << "\n";
        }
        return kExitConfig;
    }
    cfg = *parsed.config;

    for (const auto& ov : args.overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --override expects key=value, got '" << ov << "'\n";
            return kExitConfig;
        }
        if (auto err = dicke::apply_override(cfg, ov.substr(0, eq), ov.substr(eq + 1))) {
            std::cerr << "error: override " << *err << "\n";
            return kExitConfig;
        }
    }
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (!args.seed.empty()) {
        if (auto err = dicke::apply_override(cfg, "seed", args.seed)) {
            std::cerr << "error: " << *err << "\n";
            return kExitConfig;
        }
    }
    if (args.workers >= 0) cfg.workers = args.workers;
    return kExitOk;
}

int run_guarded(const dicke::RunConfig& cfg, void (*fn)(const dicke::RunConfig&)) {
    const auto start = std::chrono::steady_clock::now();
    try {
        fn(cfg);
    } catch (const dicke::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        dicke::write_error_record(cfg.output_dir, kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        dicke::write_error_record(cfg.output_dir, kExitNumerical, "numerical", e.what());
        return kExitNumerical;
    }
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    dicke::write_timing(cfg.output_dir, wall.count());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"open Dicke model solvers: exact, mean-field, cumulant, trajectories"};
    app.require_subcommand(1);

    CommonArgs sim_args, phase_args, rates_args, qfunc_args;
    auto* sim = app.add_subcommand("simulate", "single run of the configured solver");
    add_common(sim, sim_args, true);
    auto* phase = app.add_subcommand("phase-diagram", "mean-field phase sweep over g-, g+");
    add_common(phase, phase_args, true);
    auto* rates = app.add_subcommand("rates", "tunneling-rate pipeline over N and cut points");
    add_common(rates, rates_args, true);
    auto* qfunc = app.add_subcommand("q-function", "spin-Q snapshot export");
    add_common(qfunc, qfunc_args, true);
    auto* validate = app.add_subcommand("validate", "run the fast oracle suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (validate->parsed()) {
        const dicke::ValidationReport report = dicke::run_validate();
        for (const auto& e : report.entries) {
            std::cout << (e.passed ? "PASS" : "FAIL") << "  " << e.name << "  (" << e.detail
                      << ")\n";
        }
        return report.all_passed() ? kExitOk : kExitValidation;
    }

    dicke::RunConfig cfg;
    if (sim->parsed()) {
        if (int rc = load_config(sim_args, cfg)) return rc;
        return run_guarded(cfg, dicke::run_simulate);
    }
    if (phase->parsed()) {
        if (int rc = load_config(phase_args, cfg)) return rc;
        return run_guarded(cfg, dicke::run_phase_diagram);
    }
    if (rates->parsed()) {
        if (int rc = load_config(rates_args, cfg)) return rc;
        return run_guarded(cfg, dicke::run_rates);
    }
    if (qfunc->parsed()) {
        if (int rc = load_config(qfunc_args, cfg)) return rc;
        return run_guarded(cfg, dicke::run_qfunction);
    }
    return kExitConfig;
}
