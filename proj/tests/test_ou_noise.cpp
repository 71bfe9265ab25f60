#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "dicke/ou_noise.hpp"
#include "dicke/rng.hpp"

using namespace dicke;
using Cplx = std::complex<double>;

namespace {

struct PairStats {
    Cplx mean;
    double se;  // pooled per-component standard error
};

// E[z_t z_s^*] = E[conj(w_t) w_s] for the stored w = z^*.
template <typename F>
PairStats pair_average(const ModelParams& p, double dt, int n, int i, int j, int paths,
                       std::uint64_t seed, F product) {
    Cplx sum{0, 0};
    double sum2_re = 0, sum2_im = 0;
    for (int k = 0; k < paths; ++k) {
        const OUNoisePath path = sample_ou_path(p, dt, n, derive_stream_seed(seed, k));
        const Cplx v = product(path.z_conj[i], path.z_conj[j]);
        sum += v;
        sum2_re += v.real() * v.real();
        sum2_im += v.imag() * v.imag();
    }
    PairStats st;
    st.mean = sum / double(paths);
    const double var_re = (sum2_re / paths - st.mean.real() * st.mean.real()) / paths;
    const double var_im = (sum2_im / paths - st.mean.imag() * st.mean.imag()) / paths;
    st.se = std::sqrt(std::max(var_re, var_im));
    return st;
}

}  // namespace

TEST_CASE("equal-time variance matches (2g)^2") {
    const ModelParams p = balanced_params(8, 1.0, 2.5, 0.5, 1.7);
    const double var = 4.0 * p.g_bar() * p.g_bar();
    const auto st = pair_average(p, 0.01, 400, 137, 137, 10000, 11,
                                 [](Cplx wi, Cplx wj) { return std::conj(wi) * wj; });
    CHECK(std::abs(st.mean.real() - var) < 5.0 * st.se);
    CHECK(std::abs(st.mean.imag()) < 5.0 * st.se);
}

TEST_CASE("two-time correlation carries the damped phase kernel") {
    const ModelParams p = balanced_params(8, 1.0, 2.5, 0.5, 1.7);
    const double var = 4.0 * p.g_bar() * p.g_bar();
    const double dt = 0.01;
    for (auto [i, j] : std::vector<std::pair<int, int>>{{350, 300}, {380, 200}, {399, 0}}) {
        CAPTURE(i);
        CAPTURE(j);
        const double tau = (i - j) * dt;
        const Cplx target = var * std::exp(Cplx{-p.kappa * tau, -p.omega_c * tau});
        const auto st = pair_average(p, dt, 400, i, j, 10000, 23,
                                     [](Cplx wi, Cplx wj) { return std::conj(wi) * wj; });
        CHECK(std::abs(st.mean.real() - target.real()) < 5.0 * st.se);
        CHECK(std::abs(st.mean.imag() - target.imag()) < 5.0 * st.se);
    }
}

TEST_CASE("pseudo-correlation <z z> vanishes") {
    const ModelParams p = balanced_params(8, 1.0, 2.5, 0.5, 1.7);
    for (auto [i, j] : std::vector<std::pair<int, int>>{{140, 140}, {340, 260}}) {
        const auto st = pair_average(p, 0.01, 400, i, j, 10000, 37,
                                     [](Cplx wi, Cplx wj) {
                                         return std::conj(wi) * std::conj(wj);
                                     });
        CHECK(std::abs(st.mean.real()) < 5.0 * st.se);
        CHECK(std::abs(st.mean.imag()) < 5.0 * st.se);
    }
}

TEST_CASE("strong damping decorrelates neighbouring samples") {
    ModelParams p = balanced_params(8, 1.0, 2.5, 40.0, 1.7);
    const double dt = 0.1;  // e^{-kappa dt} ~ 0.018
    const double var = 4.0 * p.g_bar() * p.g_bar();
    const auto st = pair_average(p, dt, 16, 9, 8, 20000, 51,
                                 [](Cplx wi, Cplx wj) { return std::conj(wi) * wj; });
    CHECK(std::abs(st.mean) < 0.05 * var);
}

TEST_CASE("paths are deterministic in the seed") {
    const ModelParams p = balanced_params(8, 1.0, 2.5, 0.5, 1.7);
    const auto a = sample_ou_path(p, 0.01, 100, 99);
    const auto b = sample_ou_path(p, 0.01, 100, 99);
    const auto c = sample_ou_path(p, 0.01, 100, 100);
    CHECK(a.z_conj == b.z_conj);
    CHECK(a.z_conj != c.z_conj);
}

TEST_CASE("zero coupling gives an identically zero path") {
    const ModelParams p = balanced_params(8, 1.0, 2.5, 0.5, 0.0);
    const auto path = sample_ou_path(p, 0.01, 50, 3);
    for (const auto& z : path.z_conj) CHECK(std::abs(z) == 0.0);
}
