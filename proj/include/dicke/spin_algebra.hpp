#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>

#include "dicke/model.hpp"

namespace dicke {

using SparseC = Eigen::SparseMatrix<std::complex<double>>;

// Collective spin operators on the symmetric (N+1)-dimensional Dicke ladder
// |j, m>, j = N/2, stored with m descending from j to -j (basis index
// k = j - m). All matrices are at most tridiagonal.
struct SpinOperatorSet {
    int N = 0;
    SparseC sx, sy, sz, sp, sm;
    SparseC coupling;  // L = Sx - i (delta_g/g_bar) Sy

    int dimension() const { return N + 1; }
};

struct SpinState {
    Eigen::VectorXcd amplitudes;  // length N+1, index k = j - m
};

SpinOperatorSet build_spin_operators(const ModelParams& params);

// Ladder coefficients sqrt(j(j+1) - m(m±1)) for m = j - k.
// raising_coeff(N, k): amplitude of S+ mapping index k -> k-1;
// lowering_coeff(N, k): amplitude of S- mapping index k -> k+1.
double raising_coeff(int N, int k);
double lowering_coeff(int N, int k);

// |theta, phi> = exp((theta e^{i phi} S- - theta e^{-i phi} S+)/2) |j, j>,
// evaluated through the closed-form binomial amplitudes of the rotation.
SpinState spin_coherent_state(int N, double theta, double phi);

// Same state via dense matrix exponential of the generator; cross-check
// path for N <= 64.
SpinState spin_coherent_state_expm(int N, double theta, double phi);

// Basis state |j, m>; twice_m = 2m must match the parity of N.
SpinState dicke_state(int N, int twice_m);

// <state| (Sx, Sy, Sz) |state> for a normalized state.
Eigen::Vector3d spin_expectations(const SpinOperatorSet& ops, const Eigen::VectorXcd& state);

}  // namespace dicke
