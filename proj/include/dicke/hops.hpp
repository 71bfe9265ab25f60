#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "dicke/model.hpp"
#include "dicke/spin_algebra.hpp"

namespace dicke {

// Configuration of the stochastic trajectory solver.
struct HopsConfig {
    int fock_levels = 8;       // initial auxiliary-mode truncation D
    int fock_cap = 512;        // D is doubled on demand up to this cap
    double fock_tol = 1e-8;    // top-level population that triggers growth
    double window_tol = 1e-10; // edge population that triggers window growth
    int window_pad = 8;        // indices added per window growth
    double dt = 2e-3;
    int noise_oversample = 1;  // noise grid step = dt / (2 * noise_oversample)
    int n_traj = 1000;
    std::uint64_t base_seed = 1;
    long dim_cap = 4000000;    // max window * D before a trajectory is abandoned
};

// Truncated pure state on (spin window) x (auxiliary Fock levels 0..D-1),
// stored level-major: amp[d * width + (s - lo)].
struct HopsState {
    int N = 0;
    int lo = 0, hi = 0;  // inclusive Dicke-index window
    int D = 0;
    Eigen::VectorXcd amp;
    std::complex<double> mu{0.0, 0.0};  // memory integral, per-spin kernel (2g)^2/N
    double log_norm = 0.0;              // accumulated log of removed norms

    int width() const { return hi - lo + 1; }
};

struct TrajectoryRecord {
    ModelParams params;
    double dt = 0.0;
    std::uint64_t seed = 0;
    int traj_index = 0;

    std::vector<double> t;
    std::vector<double> sx, sy, sz;                // from the normalized vacuum component
    std::vector<std::complex<double>> l_expect;
    std::vector<std::complex<double>> mu;          // collective normalization, kernel (2g)^2
    std::vector<double> vacuum_weight;             // |psi^(0)|^2 within the normalized state
    std::vector<int> window_lo, window_hi, fock_used;
    double log_norm = 0.0;

    bool failed = false;
    std::string failure_reason;

    // Normalized vacuum components embedded in the full (N+1) spin basis;
    // filled only when states are requested.
    std::vector<Eigen::VectorXcd> states;
};

struct HopsRunSpec {
    double t_end = 10.0;
    int sample_stride = 25;   // record every k-th step
    bool store_states = false;
};

// Initial state psi0 (x) |0_b> on a window covering the support of psi0.
HopsState hops_initial_state(const SpinState& psi0, const ModelParams& params,
                             const HopsConfig& cfg);

// <L> of the normalized vacuum component.
std::complex<double> hops_l_expectation(const HopsState& state, const ModelParams& params);

// Applies the trajectory generator
//   -i omega_a Sz + (z* + mu*) L - mu L^dag - (i omega_c + kappa) b^dag b
//   - (2 i g_bar / sqrt(N)) ((L^dag - <L^dag>) b + (L - <L>) b^dag)
// to state.amp with all scalars frozen; linear in the amplitudes.
void hops_apply_generator(const HopsState& state, std::complex<double> z_conj,
                          std::complex<double> mu, std::complex<double> l_expect,
                          const ModelParams& params, Eigen::VectorXcd& out);

// One step of the memory recursion for the exponential kernel
//   mu_dot = -(i omega_c + kappa) mu + (2 g_bar)^2 L_expect,
// advanced exactly for L_expect held over the step.
std::complex<double> update_memory(std::complex<double> mu, std::complex<double> l_expect,
                                   const ModelParams& params, double dt);

TrajectoryRecord propagate_trajectory(const SpinState& psi0, const ModelParams& params,
                                      const HopsConfig& cfg, const HopsRunSpec& run,
                                      int traj_index);

// Per-trajectory cavity amplitude estimate a(t) = -i mu(t) / (2 g_bar sqrt(N)).
std::vector<std::complex<double>> reconstruct_cavity_amplitude(const TrajectoryRecord& record,
                                                               const ModelParams& params);

}  // namespace dicke
