// Throughput comparison of the OpenMP kernels against their serial reference
// implementations: trajectory ensembles, the sparse-dense propagator product,
// and Q-function grid evaluation.

#include <chrono>
#include <cstdio>

#include "dicke/ensemble.hpp"
#include "dicke/exact_solver.hpp"
#include "dicke/kernels.hpp"
#include "dicke/meanfield.hpp"
#include "dicke/observables.hpp"

namespace {

double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void bench_ensemble() {
    dicke::ModelParams ref;
    ref.omega_a = 1.0;
    ref.omega_c = 2.5;
    ref.kappa = 0.5;
    const dicke::ModelParams p =
        dicke::balanced_params(32, 1.0, 2.5, 0.5, 1.4 * dicke::critical_coupling(ref));
    const dicke::SpinState psi0 = dicke::spin_coherent_state(32, M_PI / 4, M_PI);
    dicke::HopsConfig cfg;
    cfg.dt = 2e-3;
    cfg.n_traj = 64;
    dicke::HopsRunSpec run;
    run.t_end = 2.0;
    run.sample_stride = 100;
    dicke::EnsembleOptions opts;
    opts.keep_records = false;

    auto t0 = std::chrono::steady_clock::now();
    dicke::run_ensemble_serial(psi0, p, cfg, run, opts);
    const double serial = seconds(t0);
    t0 = std::chrono::steady_clock::now();
    dicke::run_ensemble(psi0, p, cfg, run, opts);
    const double parallel = seconds(t0);
    std::printf("ensemble (N=32, 64 traj):   serial %.3fs   parallel %.3fs   speedup %.2fx\n",
                serial, parallel, serial / parallel);
}

void bench_spmm() {
    dicke::ModelParams ref;
    ref.omega_a = 1.0;
    ref.omega_c = 2.5;
    ref.kappa = 0.5;
    const dicke::ModelParams p =
        dicke::balanced_params(16, 1.0, 2.5, 0.5, 1.4 * dicke::critical_coupling(ref));
    const dicke::SparseC h = dicke::build_hamiltonian(p, 32);
    const int dim = static_cast<int>(h.rows());
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Random(dim, dim);
    Eigen::MatrixXcd out(dim, dim);

    const int reps = 40;
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) dicke::spmm_left_serial(h, rho, out);
    const double serial = seconds(t0);
    t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) dicke::spmm_left(h, rho, out);
    const double parallel = seconds(t0);
    std::printf("H*rho (dim=%d, %d reps):  serial %.3fs   parallel %.3fs   speedup %.2fx\n",
                dim, reps, serial, parallel, serial / parallel);
}

void bench_qfunction() {
    const dicke::SpinState cs = dicke::spin_coherent_state(200, 1.0, 0.7);
    dicke::SpinDensityMatrix rho;
    rho.rho = cs.amplitudes * cs.amplitudes.adjoint();

    auto t0 = std::chrono::steady_clock::now();
    dicke::spin_q_function_uniform(rho, 91, 180);
    const double run = seconds(t0);
    std::printf("Q function (N=200, 91x180): %.3fs\n", run);
}

}  // namespace

int main() {
    bench_spmm();
    bench_qfunction();
    bench_ensemble();
    return 0;
}
