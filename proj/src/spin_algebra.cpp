#include "dicke/spin_algebra.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

namespace dicke {

namespace {
using Cplx = std::complex<double>;
using Triplet = Eigen::Triplet<Cplx>;
constexpr Cplx I{0.0, 1.0};
}  // namespace

double raising_coeff(int N, int k) {
    const double j = 0.5 * N;
    const double m = j - k;
    return std::sqrt(j * (j + 1.0) - m * (m + 1.0));
}

double lowering_coeff(int N, int k) {
    const double j = 0.5 * N;
    const double m = j - k;
    return std::sqrt(j * (j + 1.0) - m * (m - 1.0));
}

SpinOperatorSet build_spin_operators(const ModelParams& params) {
    params.validate();
    const int N = params.N;
    const int dim = N + 1;

    std::vector<Triplet> tp, tm, tz;
    tp.reserve(dim);
    tm.reserve(dim);
    tz.reserve(dim);
    const double j = 0.5 * N;
    for (int k = 0; k < dim; ++k) {
        const double m = j - k;
        tz.emplace_back(k, k, Cplx{m, 0.0});
        if (k > 0) tp.emplace_back(k - 1, k, Cplx{raising_coeff(N, k), 0.0});
        if (k < dim - 1) tm.emplace_back(k + 1, k, Cplx{lowering_coeff(N, k), 0.0});
    }

    SpinOperatorSet ops;
    ops.N = N;
    ops.sp.resize(dim, dim);
    ops.sm.resize(dim, dim);
    ops.sz.resize(dim, dim);
    ops.sp.setFromTriplets(tp.begin(), tp.end());
    ops.sm.setFromTriplets(tm.begin(), tm.end());
    ops.sz.setFromTriplets(tz.begin(), tz.end());
    ops.sx = Cplx{0.5, 0.0} * (ops.sp + ops.sm);
    ops.sy = Cplx{0.0, -0.5} * (ops.sp - ops.sm);
    ops.coupling = ops.sx - I * params.coupling_ratio() * ops.sy;
    return ops;
}

SpinState spin_coherent_state(int N, double theta, double phi) {
    if (N < 1) throw std::domain_error("spin_coherent_state: N must be >= 1");
    const int dim = N + 1;
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(dim);

    // exp((theta/2)(e^{i phi} S- - e^{-i phi} S+)) |j,j>
    //   = sum_k sqrt(C(N,k)) cos(theta/2)^{N-k} sin(theta/2)^k e^{i k phi} |j, j-k>.
    // Evaluated in log space so large N does not overflow the binomials.
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    for (int k = 0; k < dim; ++k) {
        const double log_binom =
            std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0);
        double log_mag;
        if (k == 0) {
            log_mag = N * std::log(std::abs(c));
            if (c == 0.0) log_mag = (N == 0) ? 0.0 : -INFINITY;
        } else if (k == N) {
            log_mag = N * std::log(std::abs(s));
            if (s == 0.0) log_mag = -INFINITY;
        } else {
            if (c == 0.0 || s == 0.0) {
                amp[k] = 0.0;
                continue;
            }
            log_mag = (N - k) * std::log(std::abs(c)) + k * std::log(std::abs(s));
        }
        if (!std::isfinite(log_mag)) {
            amp[k] = 0.0;
            continue;
        }
        const double sign = ((c < 0.0 && ((N - k) % 2)) ? -1.0 : 1.0) *
                            ((s < 0.0 && (k % 2)) ? -1.0 : 1.0);
        amp[k] = sign * std::exp(0.5 * log_binom + log_mag) * std::exp(I * (phi * k));
    }
    amp.normalize();
    return SpinState{std::move(amp)};
}

SpinState spin_coherent_state_expm(int N, double theta, double phi) {
    if (N < 1) throw std::domain_error("spin_coherent_state_expm: N must be >= 1");
    if (N > 64) throw std::domain_error("spin_coherent_state_expm: dense path limited to N <= 64");
    ModelParams p;
    p.N = N;
    const SpinOperatorSet ops = build_spin_operators(p);
    Eigen::MatrixXcd gen =
        0.5 * theta *
        (std::exp(I * phi) * Eigen::MatrixXcd(ops.sm) - std::exp(-I * phi) * Eigen::MatrixXcd(ops.sp));
    Eigen::MatrixXcd rot = gen.exp();
    Eigen::VectorXcd amp = rot.col(0);  // |j, j> is the first basis vector
    return SpinState{std::move(amp)};
}

SpinState dicke_state(int N, int twice_m) {
    if (N < 1) throw std::domain_error("dicke_state: N must be >= 1");
    if ((twice_m + N) % 2 != 0)
        throw std::domain_error("dicke_state: 2m must have the same parity as N");
    if (twice_m > N || twice_m < -N)
        throw std::domain_error("dicke_state: m out of range [-j, j]");
    const int k = (N - twice_m) / 2;  // index j - m
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(N + 1);
    amp[k] = 1.0;
    return SpinState{std::move(amp)};
}

Eigen::Vector3d spin_expectations(const SpinOperatorSet& ops, const Eigen::VectorXcd& state) {
    const Cplx ex = state.dot(ops.sx * state);
    const Cplx ey = state.dot(ops.sy * state);
    const Cplx ez = state.dot(ops.sz * state);
    return {ex.real(), ey.real(), ez.real()};
}

}  // namespace dicke
