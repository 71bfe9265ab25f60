#include "dicke/exact_solver.hpp"

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

#include "dicke/kernels.hpp"

namespace dicke {

namespace {
using Cplx = std::complex<double>;
constexpr Cplx I{0.0, 1.0};

SparseC fock_annihilation(int n_fock) {
    SparseC a(n_fock, n_fock);
    std::vector<Eigen::Triplet<Cplx>> trip;
    trip.reserve(n_fock);
    for (int n = 1; n < n_fock; ++n) trip.emplace_back(n - 1, n, Cplx{std::sqrt(double(n)), 0.0});
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

SparseC identity(int dim) {
    SparseC id(dim, dim);
    id.setIdentity();
    return id;
}

// rho_dot = -i(H rho - rho H) + kappa (2 a rho a^dag - n rho - rho n)
struct LindbladRhs {
    const JointOperators& ops;
    double kappa;
    Eigen::MatrixXcd t1, t2;

    explicit LindbladRhs(const JointOperators& o, double k)
        : ops(o), kappa(k) {
        const int dim = (o.N + 1) * o.n_fock;
        t1.resize(dim, dim);
        t2.resize(dim, dim);
    }

    void operator()(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) {
        spmm_left(ops.H, rho, t1);       // t1 = H rho
        spmm_right(rho, ops.H, t2);      // t2 = rho H
        out = -I * (t1 - t2);
        if (kappa != 0.0) {
            spmm_left(ops.a, rho, t1);       // t1 = a rho
            spmm_right(t1, ops.a_dag, t2);   // t2 = a rho a^dag
            out += 2.0 * kappa * t2;
            spmm_left(ops.n_phot, rho, t1);
            spmm_right(rho, ops.n_phot, t2);
            out -= kappa * (t1 + t2);
        }
    }
};

struct Rk4DenseWorkspace {
    Eigen::MatrixXcd k1, k2, k3, k4, stage;

    explicit Rk4DenseWorkspace(int dim)
        : k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), stage(dim, dim) {}
};

void rk4_step(LindbladRhs& rhs, Eigen::MatrixXcd& rho, double dt, Rk4DenseWorkspace& w) {
    rhs(rho, w.k1);
    w.stage = rho + (0.5 * dt) * w.k1;
    rhs(w.stage, w.k2);
    w.stage = rho + (0.5 * dt) * w.k2;
    rhs(w.stage, w.k3);
    w.stage = rho + dt * w.k3;
    rhs(w.stage, w.k4);
    rho += (dt / 6.0) * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
}

std::vector<long> grid_to_steps(const std::vector<double>& t_grid, double dt) {
    if (t_grid.empty() || std::abs(t_grid.front()) > 1e-12)
        throw std::invalid_argument("evolve_exact: t_grid must start at 0");
    std::vector<long> steps(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double ratio = t_grid[i] / dt;
        const long k = std::lround(ratio);
        if (std::abs(ratio - double(k)) > 1e-6)
            throw std::invalid_argument("evolve_exact: t_grid points must be multiples of dt");
        if (i > 0 && k <= steps[i - 1])
            throw std::invalid_argument("evolve_exact: t_grid must be strictly increasing");
        steps[i] = k;
    }
    return steps;
}

std::vector<JointDensityMatrix> propagate(const JointDensityMatrix& rho0,
                                          const ModelParams& params,
                                          const std::vector<double>& t_grid,
                                          double dt, double top_tol) {
    const JointOperators ops = build_joint_operators(params, rho0.n_fock);
    LindbladRhs rhs(ops, params.kappa);
    Rk4DenseWorkspace w(rho0.dimension());
    const std::vector<long> sample_steps = grid_to_steps(t_grid, dt);

    std::vector<JointDensityMatrix> out;
    out.reserve(t_grid.size());
    Eigen::MatrixXcd rho = rho0.rho;
    long step = 0;
    for (std::size_t i = 0; i < sample_steps.size(); ++i) {
        while (step < sample_steps[i]) {
            rk4_step(rhs, rho, dt, w);
            ++step;
        }
        JointDensityMatrix snap{rho0.N, rho0.n_fock, rho};
        const double top = top_fock_population(snap);
        if (top >= top_tol)
            throw FockTruncationExceeded("evolve_exact: top Fock level population " +
                                         std::to_string(top) + " at t = " +
                                         std::to_string(t_grid[i]));
        out.push_back(std::move(snap));
    }
    return out;
}

}  // namespace

SparseC build_hamiltonian(const ModelParams& params, int n_fock) {
    params.validate();
    if (n_fock < 2) throw std::domain_error("build_hamiltonian: n_fock must be >= 2");
    const SpinOperatorSet spin = build_spin_operators(params);
    const SparseC a = fock_annihilation(n_fock);
    const SparseC ad = SparseC(a.adjoint());
    const SparseC nf = SparseC(ad * a);
    const SparseC id_s = identity(params.N + 1);
    const SparseC id_f = identity(n_fock);

    const double inv_sqrt_n = 1.0 / std::sqrt(double(params.N));
    SparseC h = params.omega_a * Eigen::kroneckerProduct(spin.sz, id_f).eval();
    h = h + params.omega_c * Eigen::kroneckerProduct(id_s, nf).eval();
    SparseC coupling =
        params.g_minus * Eigen::kroneckerProduct(spin.sm, ad).eval() +
        params.g_plus * Eigen::kroneckerProduct(spin.sp, ad).eval();
    h = h + inv_sqrt_n * (coupling + SparseC(coupling.adjoint()));
    h.makeCompressed();
    return h;
}

JointOperators build_joint_operators(const ModelParams& params, int n_fock) {
    JointOperators ops;
    ops.N = params.N;
    ops.n_fock = n_fock;
    ops.H = build_hamiltonian(params, n_fock);

    const SpinOperatorSet spin = build_spin_operators(params);
    const SparseC a = fock_annihilation(n_fock);
    const SparseC id_s = identity(params.N + 1);
    const SparseC id_f = identity(n_fock);
    ops.a = Eigen::kroneckerProduct(id_s, a).eval();
    ops.a_dag = SparseC(ops.a.adjoint());
    ops.n_phot = SparseC(ops.a_dag * ops.a);
    ops.sx = Eigen::kroneckerProduct(spin.sx, id_f).eval();
    ops.sy = Eigen::kroneckerProduct(spin.sy, id_f).eval();
    ops.sz = Eigen::kroneckerProduct(spin.sz, id_f).eval();
    ops.sx_a = Eigen::kroneckerProduct(spin.sx, a).eval();
    return ops;
}

JointDensityMatrix joint_from_spin_and_fock(const SpinState& spin, int n_fock, int photon_level) {
    const int ns = static_cast<int>(spin.amplitudes.size());
    if (photon_level < 0 || photon_level >= n_fock)
        throw std::domain_error("joint_from_spin_and_fock: photon level out of range");
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(ns * n_fock);
    for (int s = 0; s < ns; ++s) psi[s * n_fock + photon_level] = spin.amplitudes[s];
    JointDensityMatrix rho;
    rho.N = ns - 1;
    rho.n_fock = n_fock;
    rho.rho = psi * psi.adjoint();
    return rho;
}

std::vector<JointDensityMatrix> evolve_exact(const JointDensityMatrix& rho0,
                                             const ModelParams& params,
                                             const std::vector<double>& t_grid,
                                             const ExactIntegratorConfig& cfg) {
    auto result = propagate(rho0, params, t_grid, cfg.dt, cfg.top_level_tol);
    if (cfg.check_step_halving) {
        auto fine = propagate(rho0, params, t_grid, 0.5 * cfg.dt, cfg.top_level_tol);
        const JointOperators ops = build_joint_operators(params, rho0.n_fock);
        double max_diff = 0.0;
        for (std::size_t i = 0; i < result.size(); ++i) {
            const double dz = std::abs(trace_product(ops.sz, result[i].rho).real() -
                                       trace_product(ops.sz, fine[i].rho).real());
            const double dn = std::abs(trace_product(ops.n_phot, result[i].rho).real() -
                                       trace_product(ops.n_phot, fine[i].rho).real());
            max_diff = std::max({max_diff, dz, dn});
        }
        if (max_diff > cfg.step_halving_tol)
            throw StepSizeTooLarge("evolve_exact: halving dt moves observables by " +
                                   std::to_string(max_diff));
    }
    return result;
}

SpinDensityMatrix reduce_to_spin(const JointDensityMatrix& rho_tot) {
    const int ns = rho_tot.N + 1;
    const int nf = rho_tot.n_fock;
    SpinDensityMatrix out;
    out.rho = Eigen::MatrixXcd::Zero(ns, ns);
    for (int s = 0; s < ns; ++s) {
        for (int sp = 0; sp < ns; ++sp) {
            Cplx acc{0.0, 0.0};
            for (int n = 0; n < nf; ++n) acc += rho_tot.rho(s * nf + n, sp * nf + n);
            out.rho(s, sp) = acc;
        }
    }
    return out;
}

SteadyStateResult steady_state_from(const JointDensityMatrix& rho0, const ModelParams& params,
                                    const SteadyStateConfig& cfg) {
    if (params.kappa <= 0.0)
        throw std::domain_error("steady_state: requires kappa > 0");
    const JointOperators ops = build_joint_operators(params, rho0.n_fock);
    LindbladRhs rhs(ops, params.kappa);
    Rk4DenseWorkspace w(rho0.dimension());

    Eigen::MatrixXcd rho = rho0.rho;
    const long steps_per_check = std::max(1L, std::lround(cfg.check_interval / cfg.dt));
    double t = 0.0;
    SteadyStateResult res;
    while (t < cfg.max_horizon) {
        for (long s = 0; s < steps_per_check; ++s) rk4_step(rhs, rho, cfg.dt, w);
        t += double(steps_per_check) * cfg.dt;
        rhs(rho, w.k1);
        res.residual = w.k1.norm();
        if (res.residual < cfg.tol) {
            res.converged = true;
            break;
        }
    }
    res.state = JointDensityMatrix{rho0.N, rho0.n_fock, std::move(rho)};
    res.t_reached = t;
    return res;
}

SteadyStateResult steady_state(const ModelParams& params, const SteadyStateConfig& cfg) {
    const SpinState ground = dicke_state(params.N, -params.N);
    const JointDensityMatrix rho0 = joint_from_spin_vacuum(ground, cfg.n_fock);
    return steady_state_from(rho0, params, cfg);
}

std::vector<JointDensityMatrix> evolve_exact_adaptive(const SpinState& spin0,
                                                      const ModelParams& params,
                                                      const std::vector<double>& t_grid,
                                                      ExactIntegratorConfig cfg,
                                                      int n_fock_initial, int n_fock_cap) {
    int n_fock = n_fock_initial;
    while (true) {
        try {
            return evolve_exact(joint_from_spin_vacuum(spin0, n_fock), params, t_grid, cfg);
        } catch (const FockTruncationExceeded&) {
            n_fock *= 2;
            if (n_fock > n_fock_cap) throw;
        }
    }
}

std::complex<double> trace_product(const SparseC& op, const Eigen::MatrixXcd& rho) {
    Cplx acc{0.0, 0.0};
    for (int col = 0; col < op.outerSize(); ++col) {
        for (SparseC::InnerIterator it(op, col); it; ++it) {
            acc += it.value() * rho(col, it.row());
        }
    }
    return acc;
}

double top_fock_population(const JointDensityMatrix& rho) {
    const int nf = rho.n_fock;
    double pop = 0.0;
    for (int s = 0; s <= rho.N; ++s) pop += rho.rho(s * nf + nf - 1, s * nf + nf - 1).real();
    return pop;
}

}  // namespace dicke
