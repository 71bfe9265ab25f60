// Stochastic pure-state trajectories for the cavity-damped collective spin.
// The damped cavity acts as a bath with exponential correlation kernel; each
// trajectory carries a colored-noise realization z*, the memory integral mu
// of the kernel against the running <L>, and one auxiliary bosonic mode b
// describing cavity fluctuations around that mean. Physical information lives
// in the b-vacuum component of the hierarchy state.
//
// Normalization convention: the sampled OU path and the reported memory
// function carry the collective amplitude (2 g_bar)^2. A single spin couples
// to the cavity with 2 g_bar / sqrt(N), so the propagator consumes the noise
// scaled by 1/sqrt(N) and integrates mu with the kernel (2 g_bar)^2 / N; the
// recorded mu is scaled back by N. This makes the trajectory drift reproduce
// the factorized cavity field exactly and keeps every term in the generator
// of comparable magnitude for any N.

#include "dicke/hops.hpp"

#include <cmath>

#include "dicke/ou_noise.hpp"
#include "dicke/rng.hpp"

namespace dicke {

namespace {
using Cplx = std::complex<double>;
constexpr Cplx I{0.0, 1.0};

// Geometry-dependent coefficient tables for one window placement.
struct WindowCoeffs {
    std::vector<double> m;       // Sz eigenvalue per window slot
    std::vector<double> up;      // S+ source coefficient: target w gets up[w]*psi[w+1]
    std::vector<double> down;    // S- source coefficient: target w gets down[w]*psi[w-1]
    double alpha_p = 0.5;        // L = alpha_p S+ + alpha_m S-
    double alpha_m = 0.5;

    void build(int N, int lo, int hi, double ratio) {
        const int w = hi - lo + 1;
        m.resize(w);
        up.assign(w, 0.0);
        down.assign(w, 0.0);
        const double j = 0.5 * N;
        for (int k = 0; k < w; ++k) {
            const int s = lo + k;
            m[k] = j - s;
            if (k + 1 < w) up[k] = raising_coeff(N, s + 1);
            if (k > 0) down[k] = lowering_coeff(N, s - 1);
        }
        alpha_p = 0.5 * (1.0 - ratio);
        alpha_m = 0.5 * (1.0 + ratio);
    }
};

// out = L psi and out_dag = L^dag psi for one window slab.
void apply_l_slab(const WindowCoeffs& c, const Cplx* psi, Cplx* out, Cplx* out_dag) {
    const int w = static_cast<int>(c.m.size());
    for (int k = 0; k < w; ++k) {
        Cplx up{0.0, 0.0}, down{0.0, 0.0};
        if (k + 1 < w) up = c.up[k] * psi[k + 1];
        if (k > 0) down = c.down[k] * psi[k - 1];
        out[k] = c.alpha_p * up + c.alpha_m * down;
        out_dag[k] = c.alpha_m * up + c.alpha_p * down;
    }
}

struct GeneratorWorkspace {
    Eigen::VectorXcd l_psi, ldag_psi;
};

void apply_generator_impl(const HopsState& s, const WindowCoeffs& coeffs, Cplx z_conj,
                          Cplx mu, Cplx l_expect, const ModelParams& p,
                          GeneratorWorkspace& ws, Eigen::VectorXcd& out) {
    const int w = s.width();
    const int d_levels = s.D;
    ws.l_psi.resize(s.amp.size());
    ws.ldag_psi.resize(s.amp.size());
    out.resize(s.amp.size());

    for (int d = 0; d < d_levels; ++d) {
        apply_l_slab(coeffs, s.amp.data() + d * w, ws.l_psi.data() + d * w,
                     ws.ldag_psi.data() + d * w);
    }

    const Cplx noise_coef = z_conj + std::conj(mu);
    const Cplx bdagb_coef = -(I * p.omega_c + p.kappa);
    const Cplx coupling = -2.0 * I * p.g_bar() / std::sqrt(double(p.N));
    const Cplx l_dag_expect = std::conj(l_expect);

    for (int d = 0; d < d_levels; ++d) {
        const Cplx diag_f = bdagb_coef * double(d);
        Cplx* o = out.data() + d * w;
        const Cplx* a = s.amp.data() + d * w;
        const Cplx* lp = ws.l_psi.data() + d * w;
        const Cplx* ld = ws.ldag_psi.data() + d * w;
        for (int k = 0; k < w; ++k) {
            o[k] = (-I * p.omega_a * coeffs.m[k] + diag_f) * a[k] + noise_coef * lp[k] -
                   mu * ld[k];
        }
        if (d + 1 < d_levels) {
            const double bf = std::sqrt(double(d + 1));
            const Cplx* a_up = s.amp.data() + (d + 1) * w;
            const Cplx* ld_up = ws.ldag_psi.data() + (d + 1) * w;
            for (int k = 0; k < w; ++k) {
                o[k] += coupling * bf * (ld_up[k] - l_dag_expect * a_up[k]);
            }
        }
        if (d > 0) {
            const double bf = std::sqrt(double(d));
            const Cplx* a_dn = s.amp.data() + (d - 1) * w;
            const Cplx* lp_dn = ws.l_psi.data() + (d - 1) * w;
            for (int k = 0; k < w; ++k) {
                o[k] += coupling * bf * (lp_dn[k] - l_expect * a_dn[k]);
            }
        }
    }
}

Cplx l_expectation_impl(const HopsState& s, const WindowCoeffs& coeffs) {
    const int w = s.width();
    double nrm = 0.0;
    Cplx acc{0.0, 0.0};
    for (int k = 0; k < w; ++k) {
        const Cplx v = s.amp[k];  // vacuum slab is d = 0
        nrm += std::norm(v);
        Cplx up{0.0, 0.0}, down{0.0, 0.0};
        if (k + 1 < w) up = coeffs.up[k] * s.amp[k + 1];
        if (k > 0) down = coeffs.down[k] * s.amp[k - 1];
        acc += std::conj(v) * (coeffs.alpha_p * up + coeffs.alpha_m * down);
    }
    if (nrm < 1e-250) return {0.0, 0.0};
    return acc / nrm;
}

struct SpinExpect {
    double sx, sy, sz;
    double weight;  // squared norm of the vacuum slab
};

SpinExpect vacuum_spin_expectations(const HopsState& s, const WindowCoeffs& coeffs) {
    const int w = s.width();
    double nrm = 0.0, ez = 0.0;
    Cplx splus{0.0, 0.0};  // <S+>
    for (int k = 0; k < w; ++k) {
        const Cplx v = s.amp[k];
        const double p = std::norm(v);
        nrm += p;
        ez += p * coeffs.m[k];
        if (k + 1 < w) splus += std::conj(v) * coeffs.up[k] * s.amp[k + 1];
    }
    SpinExpect e{0.0, 0.0, 0.0, nrm};
    if (nrm < 1e-250) return e;
    splus /= nrm;
    e.sx = splus.real();
    e.sy = splus.imag();
    e.sz = ez / nrm;
    return e;
}

}  // namespace

HopsState hops_initial_state(const SpinState& psi0, const ModelParams& params,
                             const HopsConfig& cfg) {
    params.validate();
    const int dim = static_cast<int>(psi0.amplitudes.size());
    if (dim != params.N + 1)
        throw std::invalid_argument("hops_initial_state: state dimension does not match N");

    int lo = dim - 1, hi = 0;
    for (int k = 0; k < dim; ++k) {
        if (std::norm(psi0.amplitudes[k]) > cfg.window_tol) {
            lo = std::min(lo, k);
            hi = std::max(hi, k);
        }
    }
    if (lo > hi) { lo = 0; hi = dim - 1; }
    lo = std::max(0, lo - cfg.window_pad);
    hi = std::min(dim - 1, hi + cfg.window_pad);
    while (hi - lo + 1 < std::min(3, dim)) {
        if (lo > 0) --lo;
        if (hi < dim - 1) ++hi;
    }

    HopsState s;
    s.N = params.N;
    s.lo = lo;
    s.hi = hi;
    s.D = std::max(2, cfg.fock_levels);
    s.amp = Eigen::VectorXcd::Zero(static_cast<long>(s.width()) * s.D);
    for (int k = lo; k <= hi; ++k) s.amp[k - lo] = psi0.amplitudes[k];
    const double nrm = s.amp.norm();
    if (nrm <= 0.0) throw std::invalid_argument("hops_initial_state: zero state");
    s.amp /= nrm;
    return s;
}

std::complex<double> hops_l_expectation(const HopsState& state, const ModelParams& params) {
    WindowCoeffs c;
    c.build(state.N, state.lo, state.hi, params.coupling_ratio());
    return l_expectation_impl(state, c);
}

void hops_apply_generator(const HopsState& state, std::complex<double> z_conj,
                          std::complex<double> mu, std::complex<double> l_expect,
                          const ModelParams& params, Eigen::VectorXcd& out) {
    WindowCoeffs c;
    c.build(state.N, state.lo, state.hi, params.coupling_ratio());
    GeneratorWorkspace ws;
    apply_generator_impl(state, c, z_conj, mu, l_expect, params, ws, out);
}

std::complex<double> update_memory(std::complex<double> mu, std::complex<double> l_expect,
                                   const ModelParams& params, double dt) {
    const Cplx w{params.kappa, params.omega_c};
    const double drive = 4.0 * params.g_bar() * params.g_bar();
    const Cplx x = -w * dt;
    // phi1(x) = (e^x - 1)/x, series for small arguments
    Cplx phi1;
    if (std::abs(x) < 1e-8) {
        phi1 = 1.0 + 0.5 * x;
    } else {
        phi1 = (std::exp(x) - 1.0) / x;
    }
    return mu * std::exp(x) + drive * l_expect * dt * phi1;
}

TrajectoryRecord propagate_trajectory(const SpinState& psi0, const ModelParams& params,
                                      const HopsConfig& cfg, const HopsRunSpec& run,
                                      int traj_index) {
    TrajectoryRecord rec;
    rec.params = params;
    rec.dt = cfg.dt;
    rec.traj_index = traj_index;
    rec.seed = derive_stream_seed(cfg.base_seed, static_cast<std::uint64_t>(traj_index));

    const long n_steps = std::lround(run.t_end / cfg.dt);
    const int ov = std::max(1, cfg.noise_oversample);
    const double noise_dt = cfg.dt / (2.0 * ov);
    const OUNoisePath path =
        sample_ou_path(params, noise_dt, static_cast<std::size_t>(2 * ov * n_steps + 1), rec.seed);
    const double inv_sqrt_n = 1.0 / std::sqrt(double(params.N));
    const double kernel_scale = 1.0 / double(params.N);
    const Cplx mem_decay = -(I * params.omega_c + params.kappa);
    const double mem_drive = 4.0 * params.g_bar() * params.g_bar() * kernel_scale;

    HopsState s;
    try {
        s = hops_initial_state(psi0, params, cfg);
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.failure_reason = e.what();
        return rec;
    }

    WindowCoeffs coeffs;
    coeffs.build(s.N, s.lo, s.hi, params.coupling_ratio());
    GeneratorWorkspace ws;
    Eigen::VectorXcd k1, k2, k3, k4;
    HopsState stage = s;

    auto record_sample = [&](double t) {
        const SpinExpect e = vacuum_spin_expectations(s, coeffs);
        rec.t.push_back(t);
        rec.sx.push_back(e.sx);
        rec.sy.push_back(e.sy);
        rec.sz.push_back(e.sz);
        rec.l_expect.push_back(l_expectation_impl(s, coeffs));
        rec.mu.push_back(s.mu * double(params.N));
        rec.vacuum_weight.push_back(e.weight);
        rec.window_lo.push_back(s.lo);
        rec.window_hi.push_back(s.hi);
        rec.fock_used.push_back(s.D);
        if (run.store_states) {
            Eigen::VectorXcd full = Eigen::VectorXcd::Zero(params.N + 1);
            const double nrm = std::sqrt(std::max(e.weight, 1e-300));
            for (int k = 0; k < s.width(); ++k) full[s.lo + k] = s.amp[k] / nrm;
            rec.states.push_back(std::move(full));
        }
    };

    auto grow_window = [&](bool grow_lo, bool grow_hi) {
        const int new_lo = grow_lo ? std::max(0, s.lo - cfg.window_pad) : s.lo;
        const int new_hi = grow_hi ? std::min(params.N, s.hi + cfg.window_pad) : s.hi;
        if (new_lo == s.lo && new_hi == s.hi) return;
        const int w_old = s.width();
        const int w_new = new_hi - new_lo + 1;
        Eigen::VectorXcd na = Eigen::VectorXcd::Zero(static_cast<long>(w_new) * s.D);
        const int off = s.lo - new_lo;
        for (int d = 0; d < s.D; ++d)
            for (int k = 0; k < w_old; ++k) na[d * w_new + off + k] = s.amp[d * w_old + k];
        s.amp = std::move(na);
        s.lo = new_lo;
        s.hi = new_hi;
        coeffs.build(s.N, s.lo, s.hi, params.coupling_ratio());
    };

    auto grow_fock = [&](int new_d) {
        Eigen::VectorXcd na = Eigen::VectorXcd::Zero(static_cast<long>(s.width()) * new_d);
        na.head(s.amp.size()) = s.amp;
        s.amp = std::move(na);
        s.D = new_d;
    };

    record_sample(0.0);

    for (long step = 0; step < n_steps; ++step) {
        // RK4 on the joint (amp, mu) system; noise sampled at the stage times.
        const Cplx z0 = path.z_conj[2 * ov * step] * inv_sqrt_n;
        const Cplx zh = path.z_conj[2 * ov * step + ov] * inv_sqrt_n;
        const Cplx z1 = path.z_conj[2 * ov * (step + 1)] * inv_sqrt_n;
        const double dt = cfg.dt;

        const Cplx l1 = l_expectation_impl(s, coeffs);
        apply_generator_impl(s, coeffs, z0, s.mu, l1, params, ws, k1);
        const Cplx m1 = mem_decay * s.mu + mem_drive * l1;

        stage.N = s.N; stage.lo = s.lo; stage.hi = s.hi; stage.D = s.D;
        stage.amp = s.amp + (0.5 * dt) * k1;
        stage.mu = s.mu + (0.5 * dt) * m1;
        const Cplx l2 = l_expectation_impl(stage, coeffs);
        apply_generator_impl(stage, coeffs, zh, stage.mu, l2, params, ws, k2);
        const Cplx m2 = mem_decay * stage.mu + mem_drive * l2;

        stage.amp = s.amp + (0.5 * dt) * k2;
        stage.mu = s.mu + (0.5 * dt) * m2;
        const Cplx l3 = l_expectation_impl(stage, coeffs);
        apply_generator_impl(stage, coeffs, zh, stage.mu, l3, params, ws, k3);
        const Cplx m3 = mem_decay * stage.mu + mem_drive * l3;

        stage.amp = s.amp + dt * k3;
        stage.mu = s.mu + dt * m3;
        const Cplx l4 = l_expectation_impl(stage, coeffs);
        apply_generator_impl(stage, coeffs, z1, stage.mu, l4, params, ws, k4);
        const Cplx m4 = mem_decay * stage.mu + mem_drive * l4;

        s.amp += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s.mu += (dt / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);

        const double nrm = s.amp.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) {
            rec.failed = true;
            rec.failure_reason = "norm lost at t = " + std::to_string(double(step + 1) * dt);
            break;
        }
        s.log_norm += std::log(nrm);
        s.amp /= nrm;

        // Truncation triggers (state is normalized here).
        const int w = s.width();
        double top = 0.0;
        for (int k = 0; k < w; ++k) top += std::norm(s.amp[(s.D - 1) * w + k]);
        if (top >= cfg.fock_tol) {
            if (2 * s.D > cfg.fock_cap) {
                rec.failed = true;
                rec.failure_reason = "auxiliary mode cap reached";
                break;
            }
            grow_fock(2 * s.D);
        }
        double edge_lo = 0.0, edge_hi = 0.0;
        for (int d = 0; d < s.D; ++d) {
            edge_lo += std::norm(s.amp[d * s.width()]);
            edge_hi += std::norm(s.amp[d * s.width() + s.width() - 1]);
        }
        grow_window(s.lo > 0 && edge_lo > cfg.window_tol,
                    s.hi < params.N && edge_hi > cfg.window_tol);

        if (static_cast<long>(s.width()) * s.D > cfg.dim_cap) {
            rec.failed = true;
            rec.failure_reason = "dimension blowup";
            break;
        }
        double vac = 0.0;
        for (int k = 0; k < s.width(); ++k) vac += std::norm(s.amp[k]);
        if (vac < 1e-14) {
            rec.failed = true;
            rec.failure_reason = "vacuum component collapsed";
            break;
        }

        if ((step + 1) % run.sample_stride == 0 || step + 1 == n_steps) {
            record_sample(double(step + 1) * dt);
        }
    }
    rec.log_norm = s.log_norm;
    return rec;
}

std::vector<std::complex<double>> reconstruct_cavity_amplitude(const TrajectoryRecord& record,
                                                               const ModelParams& params) {
    std::vector<Cplx> a(record.mu.size(), Cplx{0.0, 0.0});
    if (params.g_bar() == 0.0) return a;  // decoupled: the cavity stays empty
    const Cplx scale = -I / (2.0 * params.g_bar() * std::sqrt(double(params.N)));
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = scale * record.mu[i];
    return a;
}

}  // namespace dicke
