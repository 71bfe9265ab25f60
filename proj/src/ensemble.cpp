#include "dicke/ensemble.hpp"

#include <cmath>
#include <omp.h>
#include <stdexcept>

namespace dicke {

namespace {
using Cplx = std::complex<double>;

struct Accumulator {
    std::size_t n_times = 0;
    long n = 0;
    std::vector<double> sx1, sx2, sy1, sy2, sz1, sz2;
    std::vector<Cplx> a1;             // sum of a
    std::vector<double> are2, aim2;   // sums of squares
    std::vector<Cplx> xa;             // sum of <Sx> * a
    std::vector<Eigen::MatrixXcd> rho_sum;
    // Per-trajectory series kept for the jackknife covariance error.
    std::vector<std::vector<double>> traj_sx;
    std::vector<std::vector<Cplx>> traj_a;

    void init(std::size_t nt, int dim, bool with_rho) {
        n_times = nt;
        sx1.assign(nt, 0.0); sx2.assign(nt, 0.0);
        sy1.assign(nt, 0.0); sy2.assign(nt, 0.0);
        sz1.assign(nt, 0.0); sz2.assign(nt, 0.0);
        a1.assign(nt, Cplx{0, 0});
        are2.assign(nt, 0.0); aim2.assign(nt, 0.0);
        xa.assign(nt, Cplx{0, 0});
        if (with_rho) rho_sum.assign(nt, Eigen::MatrixXcd::Zero(dim, dim));
    }

    void add(const TrajectoryRecord& rec, const ModelParams& params, bool with_rho) {
        if (rec.failed) return;
        if (rec.t.size() != n_times)
            throw std::runtime_error("ensemble: inconsistent sample grids");
        ++n;
        const auto a = reconstruct_cavity_amplitude(rec, params);
        traj_sx.emplace_back(rec.sx);
        traj_a.emplace_back(a);
        for (std::size_t i = 0; i < n_times; ++i) {
            sx1[i] += rec.sx[i]; sx2[i] += rec.sx[i] * rec.sx[i];
            sy1[i] += rec.sy[i]; sy2[i] += rec.sy[i] * rec.sy[i];
            sz1[i] += rec.sz[i]; sz2[i] += rec.sz[i] * rec.sz[i];
            a1[i] += a[i];
            are2[i] += a[i].real() * a[i].real();
            aim2[i] += a[i].imag() * a[i].imag();
            xa[i] += rec.sx[i] * a[i];
        }
        if (with_rho) {
            if (rec.states.size() != n_times)
                throw std::runtime_error("ensemble: rho requested but states missing");
            for (std::size_t i = 0; i < n_times; ++i)
                rho_sum[i] += rec.states[i] * rec.states[i].adjoint();
        }
    }

    EnsembleSummary finalize(const std::vector<double>& t_grid, bool with_rho) const {
        EnsembleSummary s;
        s.t = t_grid;
        if (n < 1) throw std::runtime_error("ensemble: needs at least 1 trajectory");
        const double dn = double(n);
        const double dof = std::max(dn - 1.0, 1.0);
        auto mean_se = [&](const std::vector<double>& s1, const std::vector<double>& s2,
                           std::vector<double>& mean, std::vector<double>& se) {
            mean.resize(n_times);
            se.resize(n_times);
            for (std::size_t i = 0; i < n_times; ++i) {
                mean[i] = s1[i] / dn;
                const double var = std::max(0.0, (s2[i] - dn * mean[i] * mean[i]) / dof);
                se[i] = std::sqrt(var / dn);
            }
        };
        mean_se(sx1, sx2, s.sx_mean, s.sx_se);
        mean_se(sy1, sy2, s.sy_mean, s.sy_se);
        mean_se(sz1, sz2, s.sz_mean, s.sz_se);

        s.a_mean.resize(n_times);
        s.a_se_re.resize(n_times);
        s.a_se_im.resize(n_times);
        s.caf.resize(n_times);
        s.caf_se_re.assign(n_times, 0.0);
        s.caf_se_im.assign(n_times, 0.0);
        for (std::size_t i = 0; i < n_times; ++i) {
            const Cplx am = a1[i] / dn;
            s.a_mean[i] = am;
            const double vr = std::max(0.0, (are2[i] - dn * am.real() * am.real()) / dof);
            const double vi = std::max(0.0, (aim2[i] - dn * am.imag() * am.imag()) / dof);
            s.a_se_re[i] = std::sqrt(vr / dn);
            s.a_se_im[i] = std::sqrt(vi / dn);
            s.caf[i] = xa[i] / dn - (sx1[i] / dn) * am;
        }

        // Jackknife over trajectories for the covariance estimator.
        if (n >= 2) {
            for (std::size_t i = 0; i < n_times; ++i) {
                Cplx sum_d{0, 0};
                double sr = 0.0, si = 0.0;
                std::vector<Cplx> loo(traj_sx.size());
                for (std::size_t k = 0; k < traj_sx.size(); ++k) {
                    const double x = traj_sx[k][i];
                    const Cplx a = traj_a[k][i];
                    const double nn = dn - 1.0;
                    const Cplx cov = (xa[i] - x * a) / nn -
                                     ((sx1[i] - x) / nn) * ((a1[i] - a) / nn);
                    loo[k] = cov;
                    sum_d += cov;
                }
                const Cplx loo_mean = sum_d / dn;
                for (const Cplx& c : loo) {
                    sr += (c.real() - loo_mean.real()) * (c.real() - loo_mean.real());
                    si += (c.imag() - loo_mean.imag()) * (c.imag() - loo_mean.imag());
                }
                s.caf_se_re[i] = std::sqrt((dn - 1.0) / dn * sr);
                s.caf_se_im[i] = std::sqrt((dn - 1.0) / dn * si);
            }
        }

        if (with_rho) {
            s.rho.resize(n_times);
            for (std::size_t i = 0; i < n_times; ++i) s.rho[i] = rho_sum[i] / dn;
        }
        return s;
    }
};

EnsembleSummary run_impl(const SpinState& psi0, const ModelParams& params,
                         const HopsConfig& cfg, const HopsRunSpec& run,
                         const EnsembleOptions& opts, bool parallel) {
    HopsRunSpec traj_run = run;
    traj_run.store_states = run.store_states || opts.accumulate_rho;

    Accumulator acc;
    bool acc_ready = false;
    std::vector<TrajectoryRecord> kept;
    std::vector<double> t_grid;
    int n_failed = 0;

    const int chunk = std::max(1, opts.chunk);
    std::vector<TrajectoryRecord> block(chunk);
    for (int start = 0; start < cfg.n_traj; start += chunk) {
        const int count = std::min(chunk, cfg.n_traj - start);
        if (parallel) {
            const int nw = opts.workers > 0 ? opts.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nw)
            for (int i = 0; i < count; ++i) {
                block[i] = propagate_trajectory(psi0, params, cfg, traj_run, start + i);
            }
        } else {
            for (int i = 0; i < count; ++i) {
                block[i] = propagate_trajectory(psi0, params, cfg, traj_run, start + i);
            }
        }
        for (int i = 0; i < count; ++i) {
            TrajectoryRecord& rec = block[i];
            if (rec.failed) {
                ++n_failed;
            } else {
                if (!acc_ready) {
                    acc.init(rec.t.size(), params.N + 1, opts.accumulate_rho);
                    t_grid = rec.t;
                    acc_ready = true;
                }
                acc.add(rec, params, opts.accumulate_rho);
            }
            if (!run.store_states) rec.states.clear();
            if (opts.keep_records) kept.push_back(std::move(rec));
        }
    }
    if (!acc_ready) throw std::runtime_error("ensemble: all trajectories failed");

    EnsembleSummary summary = acc.finalize(t_grid, opts.accumulate_rho);
    summary.n_total = cfg.n_traj;
    summary.n_failed = n_failed;
    summary.records = std::move(kept);
    return summary;
}

}  // namespace

EnsembleSummary run_ensemble(const SpinState& psi0, const ModelParams& params,
                             const HopsConfig& cfg, const HopsRunSpec& run,
                             const EnsembleOptions& opts) {
    return run_impl(psi0, params, cfg, run, opts, true);
}

EnsembleSummary run_ensemble_serial(const SpinState& psi0, const ModelParams& params,
                                    const HopsConfig& cfg, const HopsRunSpec& run,
                                    EnsembleOptions opts) {
    return run_impl(psi0, params, cfg, run, opts, false);
}

EnsembleSummary ensemble_average(const std::vector<TrajectoryRecord>& records,
                                 const ModelParams& params) {
    Accumulator acc;
    bool with_rho = false;
    bool acc_ready = false;
    int n_failed = 0;
    for (const auto& rec : records) {
        if (rec.failed) {
            ++n_failed;
            continue;
        }
        if (!acc_ready) {
            with_rho = !rec.states.empty();
            acc.init(rec.t.size(), params.N + 1, with_rho);
            acc_ready = true;
        }
        acc.add(rec, params, with_rho);
    }
    if (!acc_ready) throw std::runtime_error("ensemble_average: no successful records");
    std::vector<double> t_grid;
    for (const auto& r : records)
        if (!r.failed) { t_grid = r.t; break; }
    EnsembleSummary s = acc.finalize(t_grid, with_rho);
    s.n_total = static_cast<int>(records.size());
    s.n_failed = n_failed;
    return s;
}

}  // namespace dicke
