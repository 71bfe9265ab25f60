#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <stdexcept>
#include <vector>

#include "dicke/model.hpp"
#include "dicke/spin_algebra.hpp"

namespace dicke {

struct FockTruncationExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StepSizeTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Full spin (x) cavity state, spin-major ordering: joint index = s*n_fock + n
// with s = j - m the Dicke ladder index and n the photon number.
struct JointDensityMatrix {
    int N = 0;
    int n_fock = 0;
    Eigen::MatrixXcd rho;

    int dimension() const { return (N + 1) * n_fock; }
};

struct SpinDensityMatrix {
    Eigen::MatrixXcd rho;  // (N+1) x (N+1)
};

// Joint operators for one (params, n_fock) cell.
struct JointOperators {
    int N = 0;
    int n_fock = 0;
    SparseC H;        // full Hamiltonian
    SparseC a;        // cavity annihilation
    SparseC a_dag;
    SparseC n_phot;   // a^dag a
    SparseC sx, sy, sz;  // collective spin operators embedded in the joint space
    SparseC sx_a;     // Sx (x) a, for the atom-field covariance
};

// H = omega_a Sz + (1/sqrt(N)) (g_- S^- a^dag + g_+ S^+ a^dag + h.c.)
//   + omega_c a^dag a.
SparseC build_hamiltonian(const ModelParams& params, int n_fock);

JointOperators build_joint_operators(const ModelParams& params, int n_fock);

JointDensityMatrix joint_from_spin_and_fock(const SpinState& spin, int n_fock, int photon_level);

inline JointDensityMatrix joint_from_spin_vacuum(const SpinState& spin, int n_fock) {
    return joint_from_spin_and_fock(spin, n_fock, 0);
}

struct ExactIntegratorConfig {
    double dt = 1e-3;
    double top_level_tol = 1e-8;    // max allowed population of the top Fock level
    bool check_step_halving = false;
    double step_halving_tol = 1e-6;
};

// Propagate rho_dot = -i[H, rho] + kappa (2 a rho a^dag - {a^dag a, rho}) and
// return the states at the requested times. t_grid must start at 0, increase
// strictly, and consist of near-multiples of dt.
std::vector<JointDensityMatrix> evolve_exact(const JointDensityMatrix& rho0,
                                             const ModelParams& params,
                                             const std::vector<double>& t_grid,
                                             const ExactIntegratorConfig& cfg);

SpinDensityMatrix reduce_to_spin(const JointDensityMatrix& rho_tot);

struct SteadyStateResult {
    JointDensityMatrix state;
    bool converged = false;
    double residual = 0.0;  // Frobenius norm of rho_dot at exit
    double t_reached = 0.0;
};

struct SteadyStateConfig {
    double dt = 1e-3;
    double tol = 1e-9;
    double max_horizon = 400.0;
    double check_interval = 1.0;
    int n_fock = 16;
};

// Long-time propagation from the spin ground state (x) vacuum unless an
// explicit initial state is supplied.
SteadyStateResult steady_state(const ModelParams& params, const SteadyStateConfig& cfg);
SteadyStateResult steady_state_from(const JointDensityMatrix& rho0, const ModelParams& params,
                                    const SteadyStateConfig& cfg);

// Doubles n_fock (from cfg_n_fock) until the top-level population stays below
// tolerance over the whole horizon.
std::vector<JointDensityMatrix> evolve_exact_adaptive(const SpinState& spin0,
                                                      const ModelParams& params,
                                                      const std::vector<double>& t_grid,
                                                      ExactIntegratorConfig cfg,
                                                      int n_fock_initial = 16,
                                                      int n_fock_cap = 1024);

std::complex<double> trace_product(const SparseC& op, const Eigen::MatrixXcd& rho);

// Population of the highest Fock level.
double top_fock_population(const JointDensityMatrix& rho);

}  // namespace dicke
