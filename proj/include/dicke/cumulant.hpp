#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "dicke/model.hpp"
#include "dicke/spin_algebra.hpp"

namespace dicke {

// Gaussian (second-order cumulant) closure of the full model. Tracked set:
// first moments <Sx>, <Sy>, <Sz>, <a>; second moments <a^2>, <a^dag a>,
// <a S_i>, and the symmetrized spin moments <{S_i,S_j}>/2.
struct MomentVector {
    Eigen::Vector3d s = Eigen::Vector3d::Zero();       // <S_i>
    std::complex<double> alpha{0.0, 0.0};              // <a>
    std::complex<double> a2{0.0, 0.0};                 // <a^2>
    double nbar = 0.0;                                 // <a^dag a>
    std::array<std::complex<double>, 3> f{};           // <a S_i>
    Eigen::Matrix3d v = Eigen::Matrix3d::Zero();       // <{S_i,S_j}>/2, symmetric

    // Atom-field covariance C_af = <a Sx> - <a><Sx>.
    std::complex<double> covariance_af() const { return f[0] - alpha * s[0]; }

    static constexpr int kSize = 20;
    std::array<double, kSize> pack() const;
    static MomentVector unpack(const std::array<double, kSize>& x);
};

// Exact quantum moments of (spin state) (x) (cavity vacuum).
MomentVector moments_from_product_state(const SpinState& spin, const ModelParams& params);

// Moment vector with all second cumulants set to zero (pure products of the
// given first moments); used for the mean-field consistency check.
MomentVector factorized_moments(const Eigen::Vector3d& s, std::complex<double> alpha);

MomentVector cumulant_rhs(const MomentVector& mv, const ModelParams& params);

struct CumulantTrajectory {
    std::vector<double> t;
    std::vector<MomentVector> moments;
    bool diverged = false;  // closure blow-up; series truncated at `t.size()`
};

CumulantTrajectory evolve_cumulant(const MomentVector& mv0, const ModelParams& params,
                                   const std::vector<double>& t_grid,
                                   double rel_tol = 1e-11, double abs_tol = 1e-12);

}  // namespace dicke
