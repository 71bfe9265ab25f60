#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dicke/model.hpp"

namespace dicke {

enum class SolverKind { Exact, MeanField, Cumulant, Hops };
enum class InitialKind { Coherent, Dicke, Normal, Superradiant };

std::string to_string(SolverKind s);
std::string to_string(InitialKind k);

// Resolved run configuration. The file grammar is `key = value` per line,
// `#` starts a comment, sections are spelled with dotted keys.
struct RunConfig {
    ModelParams model;

    SolverKind solver = SolverKind::MeanField;

    InitialKind initial_kind = InitialKind::Normal;
    double initial_theta = 0.0;
    double initial_phi = 0.0;
    double initial_m = 0.0;  // Dicke |j, m> initial state

    double t_end = 10.0;
    double dt = 1e-3;
    int sample_stride = 50;

    int exact_n_fock = 16;
    double exact_top_tol = 1e-8;

    int hops_fock_levels = 8;
    int hops_fock_cap = 512;
    double hops_fock_tol = 1e-8;
    double hops_window_tol = 1e-10;
    int hops_window_pad = 8;
    int hops_noise_oversample = 1;
    int hops_n_traj = 1000;
    std::int64_t hops_dim_cap = 4000000;

    std::vector<std::string> observables;  // empty = solver default order

    std::string output_dir = "out";
    std::uint64_t seed = 1;
    int workers = 0;
    bool store_trajectories = false;

    // phase-diagram sweep
    double phase_g_minus_min = 0.0, phase_g_minus_max = 2.0;
    int phase_g_minus_steps = 21;
    double phase_g_plus_min = 0.0, phase_g_plus_max = 2.0;
    int phase_g_plus_steps = 21;

    // tunneling-rate pipeline
    std::vector<int> rates_n_list{20, 40, 60};
    std::vector<double> rates_s_list{0.69};
    int rates_n_traj = 128;
    double rates_t_end = 150.0;
    double rates_window_time = 0.0;  // 0 = default 5/kappa
    double rates_scan_min = 0.05;
    double rates_scan_max = 0.0;     // 0 = default g_minus

    // q-function snapshot
    double qfunc_time = 7.5;
    int qfunc_n_theta = 181;
    int qfunc_n_phi = 360;

    // Canonical text form; parsing it back reproduces the config exactly.
    std::string serialize() const;

    // Canonical form without the keys that cannot change any result
    // (output directory, worker count); the manifest hash covers this.
    std::string serialize_physics() const;
};

struct ConfigIssue {
    int line = 0;  // 0 when not tied to a source line
    std::string message;
};

struct ParseResult {
    std::optional<RunConfig> config;
    std::vector<ConfigIssue> errors;

    bool ok() const { return config.has_value() && errors.empty(); }
};

// Parses and validates; collects every error instead of stopping at the first.
ParseResult parse_config(const std::string& text);

// Applies one `key=value` override to an existing config; returns an error
// message on failure.
std::optional<std::string> apply_override(RunConfig& cfg, const std::string& key,
                                          const std::string& value);

}  // namespace dicke
