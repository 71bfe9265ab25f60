#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "dicke/rng.hpp"
#include "dicke/spin_algebra.hpp"

using namespace dicke;
using Cplx = std::complex<double>;

namespace {

ModelParams params_n(int n) {
    ModelParams p;
    p.N = n;
    return p;
}

double commutator_residual(const SpinOperatorSet& ops) {
    const Eigen::MatrixXcd sx = ops.sx, sy = ops.sy, sz = ops.sz;
    double worst = (sx * sy - sy * sx - Cplx{0, 1} * sz).cwiseAbs().maxCoeff();
    worst = std::max(worst, (sy * sz - sz * sy - Cplx{0, 1} * sx).cwiseAbs().maxCoeff());
    worst = std::max(worst, (sz * sx - sx * sz - Cplx{0, 1} * sy).cwiseAbs().maxCoeff());
    return worst;
}

}  // namespace

TEST_CASE("spin-1/2 limit reproduces the Pauli matrices over 2") {
    const auto ops = build_spin_operators(params_n(1));
    Eigen::MatrixXcd sz = ops.sz;
    CHECK(sz(0, 0) == Cplx{0.5, 0.0});
    CHECK(sz(1, 1) == Cplx{-0.5, 0.0});
    Eigen::MatrixXcd sx = ops.sx;
    CHECK(std::abs(sx(0, 1) - 0.5) < 1e-15);
    CHECK(std::abs(sx(1, 0) - 0.5) < 1e-15);
    Eigen::MatrixXcd sy = ops.sy;
    CHECK(std::abs(sy(0, 1) - Cplx{0.0, -0.5}) < 1e-15);
    CHECK(std::abs(sy(1, 0) - Cplx{0.0, 0.5}) < 1e-15);
}

TEST_CASE("ladder matrix element S-|1,1> = sqrt(2)|1,0>") {
    const auto ops = build_spin_operators(params_n(2));
    Eigen::MatrixXcd sm = ops.sm;
    CHECK(sm(1, 0).real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    // S- is strictly first-subdiagonal
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            if (r != c + 1) CHECK(std::abs(sm(r, c)) == 0.0);
}

TEST_CASE("commutation, Casimir and Hermiticity identities across N") {
    for (int n : {1, 2, 10, 100, 1000}) {
        CAPTURE(n);
        const auto ops = build_spin_operators(params_n(n));
        const double j = 0.5 * n;

        // scale-relative residuals; operator norms grow with N
        const double scale = j * j;
        CHECK(commutator_residual(ops) / scale < 1e-12);

        Eigen::MatrixXcd casimir =
            Eigen::MatrixXcd(ops.sx * ops.sx) + Eigen::MatrixXcd(ops.sy * ops.sy) +
            Eigen::MatrixXcd(ops.sz * ops.sz);
        casimir -= j * (j + 1.0) * Eigen::MatrixXcd::Identity(n + 1, n + 1);
        CHECK(casimir.cwiseAbs().maxCoeff() / scale < 1e-12);

        CHECK((Eigen::MatrixXcd(ops.sx) - Eigen::MatrixXcd(ops.sx).adjoint()).norm() == 0.0);
        CHECK((Eigen::MatrixXcd(ops.sy) - Eigen::MatrixXcd(ops.sy).adjoint()).norm() == 0.0);
        CHECK((Eigen::MatrixXcd(ops.sp) - Eigen::MatrixXcd(ops.sm).adjoint()).norm() == 0.0);
    }
}

TEST_CASE("N = 0 is rejected") {
    CHECK_THROWS_AS(build_spin_operators(params_n(0)), std::domain_error);
    CHECK_THROWS_AS(spin_coherent_state(0, 0.1, 0.0), std::domain_error);
}

TEST_CASE("coherent state poles") {
    const SpinState north = spin_coherent_state(12, 0.0, 0.3);
    CHECK(std::abs(north.amplitudes[0] - 1.0) < 1e-14);
    CHECK(north.amplitudes.tail(12).norm() < 1e-14);

    const SpinState south = spin_coherent_state(12, M_PI, 0.0);
    CHECK(std::abs(std::abs(south.amplitudes[12]) - 1.0) < 1e-14);
    CHECK(south.amplitudes.head(12).norm() < 1e-14);
}

TEST_CASE("equatorial coherent state at N = 2 matches the rotation exponential") {
    const SpinState closed = spin_coherent_state(2, M_PI / 2, 0.0);
    const SpinState dense = spin_coherent_state_expm(2, M_PI / 2, 0.0);
    // strip the (trivial here) global phase before comparing
    const Cplx phase = dense.amplitudes[0] / std::abs(dense.amplitudes[0]);
    for (int k = 0; k <= 2; ++k)
        CHECK(std::abs(closed.amplitudes[k] - dense.amplitudes[k] / phase) < 1e-12);
    CHECK(std::abs(closed.amplitudes[0] - 0.5) < 1e-12);
    CHECK(std::abs(closed.amplitudes[1] - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(closed.amplitudes[2] - 0.5) < 1e-12);
}

TEST_CASE("closed-form amplitudes agree with the dense exponential up to N = 64") {
    Rng rng(2024);
    for (int n : {1, 3, 8, 23, 64}) {
        const double theta = rng.next_uniform() * M_PI;
        const double phi = rng.next_uniform() * 2.0 * M_PI;
        CAPTURE(n);
        CAPTURE(theta);
        CAPTURE(phi);
        const SpinState a = spin_coherent_state(n, theta, phi);
        const SpinState b = spin_coherent_state_expm(n, theta, phi);
        // fix phases through the largest amplitude
        int k_max = 0;
        for (int k = 0; k <= n; ++k)
            if (std::abs(a.amplitudes[k]) > std::abs(a.amplitudes[k_max])) k_max = k;
        const Cplx rel = b.amplitudes[k_max] / a.amplitudes[k_max];
        CHECK(std::abs(std::abs(rel) - 1.0) < 1e-10);
        CHECK((a.amplitudes * rel - b.amplitudes).norm() < 1e-10);
    }
}

TEST_CASE("<Sz> = (N/2) cos(theta) and Bloch direction") {
    Rng rng(7);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_uniform() * 40);
        const double theta = rng.next_uniform() * M_PI;
        const double phi = rng.next_uniform() * 2.0 * M_PI;
        const auto ops = build_spin_operators(params_n(n));
        const SpinState cs = spin_coherent_state(n, theta, phi);
        const Eigen::Vector3d s = spin_expectations(ops, cs.amplitudes);
        const double j = 0.5 * n;
        CHECK(std::abs(s[2] - j * std::cos(theta)) < 1e-10 * std::max(1.0, j));
        CHECK(std::abs(s[0] - j * std::sin(theta) * std::cos(phi)) < 1e-10 * std::max(1.0, j));
        CHECK(std::abs(s[1] - j * std::sin(theta) * std::sin(phi)) < 1e-10 * std::max(1.0, j));
        CHECK(std::abs(cs.amplitudes.norm() - 1.0) < 1e-10);
    }
}

TEST_CASE("dicke_state index placement") {
    CHECK(dicke_state(2, 2).amplitudes[0] == Cplx{1.0, 0.0});
    CHECK(dicke_state(2, -2).amplitudes[2] == Cplx{1.0, 0.0});
    CHECK(dicke_state(3, 1).amplitudes[1] == Cplx{1.0, 0.0});
    CHECK_THROWS_AS(dicke_state(2, 3), std::domain_error);
    CHECK_THROWS_AS(dicke_state(2, 4), std::domain_error);
    CHECK_THROWS_AS(dicke_state(3, 2), std::domain_error);
}

TEST_CASE("coupling operator in the unbalanced model") {
    ModelParams p;
    p.N = 4;
    p.g_minus = 1.0;
    p.g_plus = 0.5;
    const auto ops = build_spin_operators(p);
    const double r = p.delta_g() / p.g_bar();
    Eigen::MatrixXcd expect =
        Eigen::MatrixXcd(ops.sx) - Cplx{0, 1} * r * Eigen::MatrixXcd(ops.sy);
    CHECK((Eigen::MatrixXcd(ops.coupling) - expect).norm() < 1e-14);

    ModelParams zero;
    zero.N = 4;
    CHECK((Eigen::MatrixXcd(build_spin_operators(zero).coupling) -
           Eigen::MatrixXcd(build_spin_operators(zero).sx))
              .norm() == 0.0);
}
