#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "dicke/hops.hpp"
#include "dicke/model.hpp"

namespace dicke {

struct EnsembleOptions {
    int workers = 0;          // 0 = library default thread count
    int chunk = 128;          // trajectories per accumulation block
    bool keep_records = true;
    bool accumulate_rho = false;
};

// Ensemble averages over successful trajectories. All reductions run in
// trajectory-index order, so the results are identical for any worker count.
struct EnsembleSummary {
    std::vector<double> t;
    int n_total = 0;
    int n_failed = 0;

    std::vector<double> sx_mean, sy_mean, sz_mean;
    std::vector<double> sx_se, sy_se, sz_se;

    // Cavity amplitude reconstructed from the memory function.
    std::vector<std::complex<double>> a_mean;
    std::vector<double> a_se_re, a_se_im;

    // Atom-field covariance estimate E[<Sx> a] - E[<Sx>] E[a] with jackknife
    // standard errors.
    std::vector<std::complex<double>> caf;
    std::vector<double> caf_se_re, caf_se_im;

    // Mean of normalized vacuum projectors; filled when requested.
    std::vector<Eigen::MatrixXcd> rho;

    std::vector<TrajectoryRecord> records;
};

EnsembleSummary run_ensemble(const SpinState& psi0, const ModelParams& params,
                             const HopsConfig& cfg, const HopsRunSpec& run,
                             const EnsembleOptions& opts = {});

// Serial reference path; must produce bit-identical results.
EnsembleSummary run_ensemble_serial(const SpinState& psi0, const ModelParams& params,
                                    const HopsConfig& cfg, const HopsRunSpec& run,
                                    EnsembleOptions opts = {});

// Statistics over already-propagated records (states used for rho when present).
EnsembleSummary ensemble_average(const std::vector<TrajectoryRecord>& records,
                                 const ModelParams& params);

}  // namespace dicke
