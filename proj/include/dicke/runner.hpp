#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dicke/config.hpp"
#include "dicke/spin_algebra.hpp"

namespace dicke {

// Raised for problems that are the user's configuration rather than numerics.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Resolves the initial spin state named by the config. The superradiant seed
// is a coherent state pointing at a stable superradiant mean-field root.
SpinState initial_spin_state(const RunConfig& cfg);

int resolve_workers(const RunConfig& cfg);

// Subcommand drivers; artifacts land in cfg.output_dir. Throws ConfigError
// for bad configs and std::runtime_error and friends for numerical failures.
void run_simulate(const RunConfig& cfg);
void run_phase_diagram(const RunConfig& cfg);
void run_rates(const RunConfig& cfg);
void run_qfunction(const RunConfig& cfg);

struct ValidationReport {
    struct Entry {
        std::string name;
        bool passed = false;
        std::string detail;
    };
    std::vector<Entry> entries;
    bool all_passed() const {
        for (const auto& e : entries)
            if (!e.passed) return false;
        return true;
    }
};

// Fast oracle suite behind the `validate` subcommand (the full acceptance
// suite lives in the test tree).
ValidationReport run_validate();

}  // namespace dicke
