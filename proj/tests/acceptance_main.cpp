// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the exit status is 0 only if every requested criterion passes. Criteria
// can be selected by number on the command line (default: all).

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dicke/cumulant.hpp"
#include "dicke/ensemble.hpp"
#include "dicke/exact_solver.hpp"
#include "dicke/meanfield.hpp"
#include "dicke/observables.hpp"
#include "dicke/ou_noise.hpp"
#include "dicke/rng.hpp"
#include "dicke/runner.hpp"
#include "dicke/tunneling.hpp"

using namespace dicke;
using Cplx = std::complex<double>;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

ModelParams fig1_params(int n) {
    ModelParams ref;
    ref.omega_a = 1.0;
    ref.omega_c = 2.5;
    ref.kappa = 0.5;
    return balanced_params(n, 1.0, 2.5, 0.5, 1.4 * critical_coupling(ref));
}

ModelParams sm_point(int n) {
    ModelParams p;
    p.N = n;
    p.omega_a = 1.0;
    p.omega_c = 1.0;
    p.kappa = 1.0;
    p.g_minus = 1.8;
    p.g_plus = 0.782;
    return p;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

EnsembleSummary run_fig1_ensemble(int n_atoms, int n_traj, double t_end, double dt,
                                  int stride, std::uint64_t seed, bool with_rho,
                                  int fock0 = 8, double wtol = 1e-10, double ftol = 1e-8,
                                  int oversample = 1) {
    const ModelParams p = fig1_params(n_atoms);
    const SpinState psi0 = spin_coherent_state(n_atoms, M_PI / 4, M_PI);
    HopsConfig cfg;
    cfg.dt = dt;
    cfg.n_traj = n_traj;
    cfg.base_seed = seed;
    cfg.fock_levels = fock0;
    cfg.window_tol = wtol;
    cfg.fock_tol = ftol;
    cfg.noise_oversample = oversample;
    HopsRunSpec run;
    run.t_end = t_end;
    run.sample_stride = stride;
    EnsembleOptions opts;
    opts.keep_records = false;
    opts.accumulate_rho = with_rho;
    return run_ensemble(psi0, p, cfg, run, opts);
}

// -------------------------------------------------------------------------
// 1. trajectory ensemble against the exact reduced dynamics at N = 8
Outcome criterion_1() {
    const int n = 8;
    const ModelParams p = fig1_params(n);
    const EnsembleSummary es = run_fig1_ensemble(n, 2000, 10.0, 2e-3, 25, 1001, true);

    ExactIntegratorConfig icfg;
    icfg.dt = 1e-3;
    const SpinState psi0 = spin_coherent_state(n, M_PI / 4, M_PI);
    const auto exact = evolve_exact_adaptive(psi0, p, es.t, icfg, 24);
    const JointOperators ops = build_joint_operators(p, exact.front().n_fock);

    const double floor_gate = 0.02 * n / 2.0;
    double worst = 0.0;
    std::size_t idx75 = 0;
    for (std::size_t i = 0; i < es.t.size(); ++i) {
        if (std::abs(es.t[i] - 7.5) < 1e-9) idx75 = i;
        const double dx = std::abs(es.sx_mean[i] - trace_product(ops.sx, exact[i].rho).real());
        const double dy = std::abs(es.sy_mean[i] - trace_product(ops.sy, exact[i].rho).real());
        const double dz = std::abs(es.sz_mean[i] - trace_product(ops.sz, exact[i].rho).real());
        worst = std::max({worst, dx / std::max(3.0 * es.sx_se[i], floor_gate),
                          dy / std::max(3.0 * es.sy_se[i], floor_gate),
                          dz / std::max(3.0 * es.sz_se[i], floor_gate)});
    }

    const SpinDensityMatrix target = reduce_to_spin(exact[idx75]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esolver(es.rho[idx75] - target.rho);
    const double td = 0.5 * esolver.eigenvalues().cwiseAbs().sum();

    Outcome o;
    o.pass = worst < 1.0 && td < 0.05 && es.n_failed == 0;
    o.detail = fmt("max deviation/gate = %.3f (<1), trace distance at t=7.5 = %.4f (<0.05), "
                   "%d/%d failed",
                   worst, td, es.n_failed, es.n_total);
    return o;
}

// -------------------------------------------------------------------------
// 2. deviation from mean-field shrinks with N
Outcome criterion_2() {
    const std::vector<int> sizes{25, 100, 400};
    const std::vector<int> n_traj{512, 512, 256};
    std::vector<double> deviation;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const int n = sizes[k];
        const EnsembleSummary es =
            run_fig1_ensemble(n, n_traj[k], 10.0, 2e-3, 50, 2002 + k, false);
        const MeanFieldState init = meanfield_from_direction(M_PI / 4, M_PI);
        const auto mf = evolve_meanfield(init, fig1_params(n), es.t);
        double acc = 0.0;
        for (std::size_t i = 0; i < es.t.size(); ++i) {
            const Eigen::Vector3d m_q{es.sx_mean[i] / n, es.sy_mean[i] / n,
                                      es.sz_mean[i] / n};
            acc += (m_q - mf.states[i].m).norm();
        }
        deviation.push_back(acc / double(es.t.size()));
    }
    Outcome o;
    o.pass = deviation[0] > deviation[1] && deviation[1] > deviation[2];
    o.detail = fmt("time-averaged deviation: N=25: %.4f > N=100: %.4f > N=400: %.4f",
                   deviation[0], deviation[1], deviation[2]);
    return o;
}

// -------------------------------------------------------------------------
// 3. numerically detected bifurcation against the closed-form g_c
Outcome criterion_3() {
    Rng rng(303);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        ModelParams base;
        base.N = 16;
        base.omega_a = 0.5 + 2.0 * rng.next_uniform();
        base.omega_c = 0.5 + 2.0 * rng.next_uniform();
        base.kappa = 0.1 + 1.1 * rng.next_uniform();
        const double gc = critical_coupling(base);
        auto sr_exists = [&base](double two_g) {
            const ModelParams q =
                balanced_params(base.N, base.omega_a, base.omega_c, base.kappa, two_g);
            for (const auto& fp : find_fixed_points(q))
                if (!fp.is_normal && fp.stable) return true;
            return false;
        };
        double lo = 0.3 * gc, hi = 2.0 * gc;
        if (sr_exists(lo) || !sr_exists(hi)) {
            return {false, fmt("bracket failed at trial %d", trial)};
        }
        for (int i = 0; i < 30; ++i) {
            const double mid = 0.5 * (lo + hi);
            (sr_exists(mid) ? hi : lo) = mid;
        }
        worst = std::max(worst, std::abs(0.5 * (lo + hi) - gc) / gc);
    }
    Outcome o;
    o.pass = worst < 0.01;
    o.detail = fmt("worst relative bifurcation offset over 10 draws = %.2e (<1e-2)", worst);
    return o;
}

// -------------------------------------------------------------------------
// 4. OU noise correlation at 1e4 paths
Outcome criterion_4() {
    const ModelParams p = fig1_params(8);
    const double dt = 0.01;
    const int n_samp = 1001;  // horizon 10
    const int n_paths = 10000;
    const double var = 4.0 * p.g_bar() * p.g_bar();

    const std::vector<std::pair<int, int>> pairs{{200, 200}, {205, 200}, {220, 200},
                                                 {300, 200}, {500, 200}, {500, 495},
                                                 {900, 600}, {1000, 0},  {700, 700}};
    std::vector<Cplx> corr_sum(pairs.size(), Cplx{0, 0});
    std::vector<double> corr2_re(pairs.size(), 0.0), corr2_im(pairs.size(), 0.0);
    std::vector<Cplx> pseudo_sum(pairs.size(), Cplx{0, 0});
    std::vector<double> pseudo2_re(pairs.size(), 0.0), pseudo2_im(pairs.size(), 0.0);

    for (int k = 0; k < n_paths; ++k) {
        const OUNoisePath path = sample_ou_path(p, dt, n_samp, derive_stream_seed(404, k));
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            const auto [i, j] = pairs[q];
            // z_t z_s^* = conj(w_i) w_j for the stored w = z^*
            const Cplx c = std::conj(path.z_conj[i]) * path.z_conj[j];
            corr_sum[q] += c;
            corr2_re[q] += c.real() * c.real();
            corr2_im[q] += c.imag() * c.imag();
            const Cplx ps = std::conj(path.z_conj[i]) * std::conj(path.z_conj[j]);
            pseudo_sum[q] += ps;
            pseudo2_re[q] += ps.real() * ps.real();
            pseudo2_im[q] += ps.imag() * ps.imag();
        }
    }

    double worst = 0.0;
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        const auto [i, j] = pairs[q];
        const double tau = (i - j) * dt;
        const Cplx target = var * std::exp(Cplx{-p.kappa * tau, -p.omega_c * tau});
        const Cplx mean = corr_sum[q] / double(n_paths);
        const double se_re =
            std::sqrt((corr2_re[q] / n_paths - mean.real() * mean.real()) / n_paths);
        const double se_im =
            std::sqrt((corr2_im[q] / n_paths - mean.imag() * mean.imag()) / n_paths);
        worst = std::max(worst, std::abs(mean.real() - target.real()) / (5.0 * se_re));
        worst = std::max(worst, std::abs(mean.imag() - target.imag()) / (5.0 * se_im));

        const Cplx pmean = pseudo_sum[q] / double(n_paths);
        const double pse_re =
            std::sqrt((pseudo2_re[q] / n_paths - pmean.real() * pmean.real()) / n_paths);
        const double pse_im =
            std::sqrt((pseudo2_im[q] / n_paths - pmean.imag() * pmean.imag()) / n_paths);
        worst = std::max(worst, std::abs(pmean.real()) / (5.0 * pse_re));
        worst = std::max(worst, std::abs(pmean.imag()) / (5.0 * pse_im));
    }
    Outcome o;
    o.pass = worst < 1.0;
    o.detail = fmt("worst |deviation|/(5 SE) over %zu pairs = %.3f (<1)", pairs.size(), worst);
    return o;
}

// -------------------------------------------------------------------------
// 5. rate-equation algebra
Outcome criterion_5() {
    Rng rng(505);
    double worst_curve = 0.0, worst_steady = 0.0;
    std::vector<double> t_grid;
    for (int i = 0; i <= 100; ++i) t_grid.push_back(i);
    for (int trial = 0; trial < 100; ++trial) {
        const double gns = rng.next_uniform() * 0.5;
        const double gsn = rng.next_uniform() * 0.5;
        const double gss = rng.next_uniform() * 0.5;
        const double pn0 = rng.next_uniform();
        const double split = rng.next_uniform();
        const Eigen::Vector3d p0{pn0, (1 - pn0) * split, (1 - pn0) * (1 - split)};
        const auto sol = rate_ode_full(gns, gsn, gss, p0, t_grid);
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            const auto [pn, ps] = rate_solution(gns, gsn, p0[0], p0[1] + p0[2], t_grid[i]);
            worst_curve = std::max(worst_curve, std::abs(pn - sol[i][0]));
            worst_curve = std::max(worst_curve, std::abs(ps - (sol[i][1] + sol[i][2])));
        }
        if (gns > 1e-3 && gsn > 1e-3) {
            const auto [pn_inf, ps_inf] = rate_solution(gns, gsn, pn0, 1 - pn0, 1e9);
            worst_steady =
                std::max(worst_steady, std::abs(pn_inf - 1.0 / (1.0 + 2.0 * gns / gsn)));
        }
    }
    Outcome o;
    o.pass = worst_curve < 1e-10 && worst_steady < 1e-12;
    o.detail = fmt("closed form vs integration: %.2e (<1e-10); steady state: %.2e (<1e-12)",
                   worst_curve, worst_steady);
    return o;
}

// -------------------------------------------------------------------------
// 6. tunneling pipeline at the reference bistable point
Outcome criterion_6() {
    const std::vector<int> sizes{20, 40, 60};
    const int n_traj = 192;
    const double t_end = 150.0;
    const double window_time = 5.0;  // 5/kappa

    const auto fps = find_fixed_points(sm_point(20));
    const ClassifierReference ref = ClassifierReference::from_fixed_points(fps);
    Eigen::Vector3d sr_m = ref.superradiant.front();
    for (const auto& m : ref.superradiant)
        if (m[0] > sr_m[0]) sr_m = m;
    const double theta = std::acos(std::clamp(2.0 * sr_m[2], -1.0, 1.0));
    const double phi = std::atan2(sr_m[1], sr_m[0]);

    std::vector<std::pair<int, RateFit>> per_n;
    std::string runs_detail;
    std::uint64_t cell = 0;
    for (const int n : sizes) {
        const ModelParams p = sm_point(n);
        HopsConfig cfg;
        cfg.dt = 5e-3;
        cfg.n_traj = n_traj;
        HopsRunSpec run;
        run.t_end = t_end;
        run.sample_stride = 50;  // samples every 0.25
        EnsembleOptions opts;
        opts.keep_records = true;

        auto run_start = [&](const SpinState& psi0) {
            HopsConfig h = cfg;
            h.base_seed = derive_stream_seed(606, cell++);
            return run_ensemble(psi0, p, h, run, opts);
        };
        const EnsembleSummary norm_run = run_start(dicke_state(n, -n));
        const EnsembleSummary sr_run = run_start(spin_coherent_state(n, theta, phi));

        auto labels_of = [&](const EnsembleSummary& es) {
            std::vector<std::vector<MetastablePhase>> labels;
            for (const auto& rec : es.records)
                if (!rec.failed) labels.push_back(classify_state(rec, ref, window_time));
            return labels;
        };
        OccupationCurves oc_n = occupation_curves(labels_of(norm_run), norm_run.t);
        oc_n.initial_phase = MetastablePhase::Normal;
        OccupationCurves oc_s = occupation_curves(labels_of(sr_run), sr_run.t);
        oc_s.initial_phase = MetastablePhase::Superradiant;

        const RateFit fit = fit_rates(oc_n, oc_s);
        runs_detail += fmt(" N=%d: gamma_ns=%.3e%s gamma_sn=%.3e%s;", n, fit.gamma_ns,
                           fit.status_ns == RateStatus::UpperBound ? "(ub)" : "",
                           fit.gamma_sn,
                           fit.status_sn == RateStatus::UpperBound ? "(ub)" : "");
        per_n.emplace_back(n, fit);
    }

    bool fitted = true, positive = true, decreasing = true;
    for (std::size_t k = 0; k < per_n.size(); ++k) {
        const RateFit& f = per_n[k].second;
        fitted = fitted && f.status_ns == RateStatus::Ok && f.status_sn == RateStatus::Ok;
        positive = positive && f.gamma_ns > 0.0 && f.gamma_sn > 0.0;
        if (k > 0) {
            decreasing = decreasing && f.gamma_ns < per_n[k - 1].second.gamma_ns &&
                         f.gamma_sn < per_n[k - 1].second.gamma_sn;
        }
    }
    const ExponentFit ef = fit_exponents(per_n);
    const bool exponents_negative = ef.r_ns < 0.0 && ef.r_sn < 0.0;

    // synthetic closed-loop recovery, 100 instances
    Rng rng(2025);
    int covered = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double gns = 0.002 + rng.next_uniform() * 0.02;
        const double gsn = 0.002 + rng.next_uniform() * 0.02;
        auto make_curve = [&](bool normal_start) {
            OccupationCurves oc;
            oc.n_traj = 400;
            oc.initial_phase =
                normal_start ? MetastablePhase::Normal : MetastablePhase::Superradiant;
            for (int i = 0; i <= 60; ++i) {
                const double t = 150.0 * i / 60.0;
                const auto [pn, ps] = normal_start ? rate_solution(gns, gsn, 1, 0, t)
                                                   : rate_solution(gns, gsn, 0, 1, t);
                int k = 0;
                for (int m = 0; m < oc.n_traj; ++m)
                    if (rng.next_uniform() < ps) ++k;
                const double p_s = double(k) / oc.n_traj;
                oc.t.push_back(t);
                oc.p_s.push_back(p_s);
                oc.p_n.push_back(1.0 - p_s);
                oc.se.push_back(std::sqrt(std::max(0.0, p_s * (1 - p_s) / oc.n_traj)));
            }
            return oc;
        };
        const RateFit fit = fit_rates(make_curve(true), make_curve(false));
        if (std::abs(fit.gamma_ns - gns) <= 3.0 * fit.sigma_ns &&
            std::abs(fit.gamma_sn - gsn) <= 3.0 * fit.sigma_sn)
            ++covered;
    }
    const bool closed_loop = covered >= 98;  // 3-sigma coverage allows rare misses

    Outcome o;
    o.pass = fitted && positive && decreasing && exponents_negative && closed_loop;
    o.detail = fmt("%s r_ns=%.4f r_sn=%.4f; closed-loop %d/100 within 3 sigma",
                   runs_detail.c_str(), ef.r_ns, ef.r_sn, covered);
    return o;
}

// -------------------------------------------------------------------------
// 7. observable suite
Outcome criterion_7() {
    std::string detail;
    bool pass = true;

    // Q normalization on assorted snapshots
    double worst_norm = 0.0;
    {
        Rng rng(707);
        for (int n : {8, 16, 33}) {
            SpinDensityMatrix coh;
            const SpinState cs =
                spin_coherent_state(n, rng.next_uniform() * M_PI, rng.next_uniform() * 6.28);
            coh.rho = cs.amplitudes * cs.amplitudes.adjoint();
            worst_norm = std::max(worst_norm, std::abs(q_function_normalization(coh) - 1.0));

            Eigen::MatrixXcd a(n + 1, n + 1);
            for (int i = 0; i <= n; ++i)
                for (int k = 0; k <= n; ++k)
                    a(i, k) = Cplx{rng.next_gaussian(), rng.next_gaussian()};
            SpinDensityMatrix mixed;
            mixed.rho = a * a.adjoint();
            mixed.rho /= mixed.rho.trace().real();
            worst_norm = std::max(worst_norm, std::abs(q_function_normalization(mixed) - 1.0));
        }
    }
    pass = pass && worst_norm < 1e-8;
    detail += fmt("Q norm offset %.1e (<1e-8);", worst_norm);

    // squeezing reference values
    {
        SpinDensityMatrix coh;
        const SpinState cs = spin_coherent_state(24, 1.1, 0.4);
        coh.rho = cs.amplitudes * cs.amplitudes.adjoint();
        const double xi2 = spin_squeezing(coh).xi2;
        pass = pass && std::abs(xi2 - 1.0) < 1e-10;
        detail += fmt(" coherent xi2-1 = %.1e (<1e-10);", std::abs(xi2 - 1.0));

        SpinState oat = spin_coherent_state(20, M_PI / 2, 0.0);
        for (int k = 0; k <= 20; ++k) {
            const double m = 10.0 - k;
            oat.amplitudes[k] *= std::exp(Cplx{0.0, -0.05 * m * m});
        }
        SpinDensityMatrix oat_rho;
        oat_rho.rho = oat.amplitudes * oat.amplitudes.adjoint();
        const double xi2_oat = spin_squeezing(oat_rho).xi2;
        pass = pass && xi2_oat < 1.0;
        detail += fmt(" twisted xi2 = %.3f (<1);", xi2_oat);
    }

    // negativity reference values
    {
        SpinDensityMatrix triplet;
        const SpinState st = dicke_state(2, 0);
        triplet.rho = st.amplitudes * st.amplitudes.adjoint();
        const double neg = bipartite_negativity_2j(triplet, 2, 1);
        pass = pass && std::abs(neg - 0.5) < 1e-12;

        SpinDensityMatrix stretched;
        const SpinState top = dicke_state(8, 8);
        stretched.rho = top.amplitudes * top.amplitudes.adjoint();
        const double neg0 = bipartite_negativity(stretched, 8);
        pass = pass && neg0 < 1e-12;
        detail +=
            fmt(" |1,0> negativity-1/2 = %.1e; product = %.1e;", std::abs(neg - 0.5), neg0);
    }

    // transient entanglement at N = 16
    {
        const int n = 16;
        const ModelParams p = fig1_params(n);
        const SpinState psi0 = spin_coherent_state(n, M_PI / 4, M_PI);
        std::vector<double> grid;
        for (int i = 0; i <= 120; ++i) grid.push_back(0.25 * i);  // to t = 30
        ExactIntegratorConfig icfg;
        icfg.dt = 2e-3;
        const auto states = evolve_exact_adaptive(psi0, p, grid, icfg, 32);
        double peak = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i] > 15.0) break;
            peak = std::max(peak, bipartite_negativity(reduce_to_spin(states[i]), n));
        }
        const double steady = bipartite_negativity(reduce_to_spin(states.back()), n);
        pass = pass && peak > 10.0 * steady;
        detail += fmt(" negativity peak %.4f vs steady %.5f (>10x)", peak, steady);
    }

    return {pass, detail};
}

// -------------------------------------------------------------------------
// 8. cumulant consistency
Outcome criterion_8() {
    const ModelParams p = fig1_params(8);
    const SpinState psi0 = spin_coherent_state(8, M_PI / 4, M_PI);
    const MomentVector m0 = moments_from_product_state(psi0, p);
    const MomentVector d = cumulant_rhs(m0, p);

    ExactIntegratorConfig cfg;
    cfg.dt = 2.5e-4;
    const double h = 1e-3;
    const std::vector<double> grid{0.0, h, 2 * h, 3 * h, 4 * h};
    const auto states = evolve_exact(joint_from_spin_vacuum(psi0, 32), p, grid, cfg);
    const JointOperators ops = build_joint_operators(p, 32);
    std::array<double, 5> f{};
    for (int i = 0; i < 5; ++i) f[i] = trace_product(ops.sz, states[i].rho).real();
    const double deriv =
        (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h);
    const double derivative_err = std::abs(d.s[2] - deriv);

    // zeroed second cumulants against the mean-field flow
    Rng rng(808);
    double worst_mf = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
        ModelParams q;
        q.N = 4 + trial;
        q.omega_a = 0.5 + rng.next_uniform();
        q.omega_c = 0.5 + 2 * rng.next_uniform();
        q.kappa = rng.next_uniform();
        q.g_minus = 2 * rng.next_uniform();
        q.g_plus = 2 * rng.next_uniform();
        MeanFieldState mf = meanfield_from_direction(rng.next_uniform() * M_PI,
                                                     rng.next_uniform() * 2 * M_PI);
        mf.beta = {0.3 * rng.next_gaussian(), 0.3 * rng.next_gaussian()};
        const MomentVector mv =
            factorized_moments(double(q.N) * mf.m, std::sqrt(double(q.N)) * mf.beta);
        const MomentVector dm = cumulant_rhs(mv, q);
        const MeanFieldState dr = meanfield_rhs(mf, q);
        worst_mf = std::max(worst_mf, (dm.s / q.N - dr.m).norm());
        worst_mf =
            std::max(worst_mf, std::abs(dm.alpha / std::sqrt(double(q.N)) - dr.beta));
    }

    Outcome o;
    o.pass = derivative_err < 1e-6 && worst_mf < 1e-12;
    o.detail = fmt("d<Sz>/dt offset = %.2e (<1e-6); factorized-vs-mean-field = %.2e (<1e-12)",
                   derivative_err, worst_mf);
    return o;
}

// -------------------------------------------------------------------------
// 9. determinism and convergence hygiene
Outcome criterion_9() {
    namespace fs = std::filesystem;
    std::string detail;
    bool pass = true;

    // byte identity across worker counts
    {
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p);
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        RunConfig cfg;
        cfg.model = fig1_params(8);
        cfg.solver = SolverKind::Hops;
        cfg.initial_kind = InitialKind::Coherent;
        cfg.initial_theta = M_PI / 4;
        cfg.initial_phi = M_PI;
        cfg.t_end = 2.0;
        cfg.dt = 2e-3;
        cfg.sample_stride = 100;
        cfg.hops_n_traj = 64;
        cfg.seed = 909;
        cfg.store_trajectories = true;

        const fs::path base = fs::temp_directory_path() / "dicke_acceptance_9";
        fs::remove_all(base);
        cfg.output_dir = (base / "w1").string();
        cfg.workers = 1;
        run_simulate(cfg);
        cfg.output_dir = (base / "w8").string();
        cfg.workers = 8;
        run_simulate(cfg);
        bool identical =
            slurp(base / "w1" / "ensemble.dat") == slurp(base / "w8" / "ensemble.dat");
        for (int i : {0, 13, 63}) {
            const std::string name = fmt("traj_%05d.dat", i);
            identical =
                identical && slurp(base / "w1" / name) == slurp(base / "w8" / name);
        }
        fs::remove_all(base);
        pass = pass && identical;
        detail += fmt("workers 1 vs 8 byte-identical: %s;", identical ? "yes" : "NO");
    }

    // step halving and truncation tightening on the criterion-1 observables
    {
        const int n_traj = 512;
        const EnsembleSummary base =
            run_fig1_ensemble(8, n_traj, 10.0, 2e-3, 25, 1001, false, 8, 1e-10, 1e-8, 2);
        const EnsembleSummary halved =
            run_fig1_ensemble(8, n_traj, 10.0, 1e-3, 50, 1001, false, 8, 1e-10, 1e-8, 1);
        double worst_dt = 0.0;
        for (std::size_t i = 0; i < base.t.size(); ++i) {
            worst_dt = std::max({worst_dt, std::abs(base.sx_mean[i] - halved.sx_mean[i]),
                                 std::abs(base.sy_mean[i] - halved.sy_mean[i]),
                                 std::abs(base.sz_mean[i] - halved.sz_mean[i])});
        }
        pass = pass && worst_dt < 1e-4;
        detail += fmt(" step halving max shift %.2e (<1e-4);", worst_dt);

        const EnsembleSummary strict =
            run_fig1_ensemble(8, n_traj, 10.0, 2e-3, 25, 1001, false, 16, 1e-11, 1e-9, 2);
        double worst_trunc = 0.0;
        for (std::size_t i = 0; i < base.t.size(); ++i) {
            worst_trunc =
                std::max({worst_trunc, std::abs(base.sx_mean[i] - strict.sx_mean[i]),
                          std::abs(base.sy_mean[i] - strict.sy_mean[i]),
                          std::abs(base.sz_mean[i] - strict.sz_mean[i])});
        }
        pass = pass && worst_trunc < 1e-4;
        detail += fmt(" truncation tightening max shift %.2e (<1e-4)", worst_trunc);
    }

    return {pass, detail};
}

// -------------------------------------------------------------------------
// 10. symmetric quench at N = 32
Outcome criterion_10() {
    const int n = 32;
    const ModelParams p = fig1_params(n);
    const SpinState psi0 = spin_coherent_state(n, M_PI, 0.0);
    HopsConfig cfg;
    cfg.dt = 2e-3;
    cfg.n_traj = 512;
    cfg.base_seed = 1010;
    HopsRunSpec run;
    run.t_end = 10.0;
    run.sample_stride = 50;
    const EnsembleSummary es = run_ensemble(psi0, p, cfg, run, {});

    double worst_sym = 0.0;
    double max_sz_departure = 0.0;
    for (std::size_t i = 1; i < es.t.size(); ++i) {
        worst_sym = std::max(worst_sym, std::abs(es.sx_mean[i]) / (3.0 * es.sx_se[i]));
        worst_sym = std::max(worst_sym, std::abs(es.sy_mean[i]) / (3.0 * es.sy_se[i]));
        max_sz_departure = std::max(max_sz_departure, std::abs(es.sz_mean[i] + n / 2.0));
    }
    Outcome o;
    o.pass = worst_sym < 1.0 && max_sz_departure > 1.0;
    o.detail = fmt("max |<Sx,y>|/(3 SE) = %.3f (<1); max |<Sz> + N/2| = %.2f (>1)", worst_sym,
                   max_sz_departure);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
    if (wanted.empty()) wanted = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    using CriterionFn = Outcome (*)();
    const CriterionFn fns[10] = {criterion_1, criterion_2, criterion_3, criterion_4,
                                 criterion_5, criterion_6, criterion_7, criterion_8,
                                 criterion_9, criterion_10};

    int failures = 0;
    for (int idx : wanted) {
        if (idx < 1 || idx > 10) {
            std::printf("criterion %d: unknown\n", idx);
            ++failures;
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fns[idx - 1]();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2d: %s  [%.1fs]  %s\n", idx, o.pass ? "PASS" : "FAIL", secs,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 4;
}
