#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "dicke/exact_solver.hpp"
#include "dicke/spin_algebra.hpp"

namespace dicke {

struct DegenerateMeanSpin : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Q(theta, phi) = <theta, phi| rho |theta, phi> on a (theta x phi) grid.
struct QFunctionGrid {
    std::vector<double> theta_nodes;
    std::vector<double> phi_nodes;
    Eigen::MatrixXd values;  // theta rows, phi columns
};

QFunctionGrid spin_q_function(const SpinDensityMatrix& rho, const std::vector<double>& theta_nodes,
                              const std::vector<double>& phi_nodes);

QFunctionGrid spin_q_function_uniform(const SpinDensityMatrix& rho, int n_theta = 181,
                                      int n_phi = 360);

// ((N+1)/4pi) Int Q dOmega, evaluated with Gauss-Legendre nodes in cos(theta)
// and a uniform periodic grid in phi; equals 1 for a unit-trace state.
double q_function_normalization(const SpinDensityMatrix& rho);

// C_af = <Sx a> - <Sx><a> from the joint state.
std::complex<double> atom_field_covariance(const JointDensityMatrix& rho_tot);

struct SqueezingResult {
    double xi2 = 0.0;
    Eigen::Vector3d e_perp = Eigen::Vector3d::Zero();
};

// xi^2 = N min_var / |<S>|^2, minimized over tangent directions
// perpendicular to <S>: the smaller eigenvalue of the 2x2 tangent covariance.
SqueezingResult spin_squeezing(const SpinDensityMatrix& rho);

// <j1 m1; j2 m2 | J M> in the Condon-Shortley convention, computed by the
// ladder recursion; quantum numbers passed as twice their value.
double clebsch_gordan_2j(int tj1, int tj2, int tm1, int tm2, int tJ, int tM);

inline double clebsch_gordan(double j1, double j2, double m1, double m2, double J, double M) {
    auto twice = [](double x) {
        const double t = 2.0 * x;
        const double r = std::round(t);
        if (std::abs(t - r) > 1e-9)
            throw std::domain_error("clebsch_gordan: quantum numbers must be (half-)integers");
        return static_cast<int>(r);
    };
    return clebsch_gordan_2j(twice(j1), twice(j2), twice(m1), twice(m2), twice(J), twice(M));
}

// Isometry from the spin-(N/2) ladder into (spin j_half) x (spin j_half),
// j_half = N/4 passed as twice its value; columns are the coupled basis states.
Eigen::MatrixXd two_spin_embedding(int N, int twice_j_half);

// Negativity (sum of |negative eigenvalues| of the partial transpose) of the
// two-group split of the collective state; requires N divisible by 4.
double bipartite_negativity(const SpinDensityMatrix& rho, int N);

// Test-level entry with an explicit half-spin (twice value), used for the
// two-spin-1/2 reference case.
double bipartite_negativity_2j(const SpinDensityMatrix& rho, int N, int twice_j_half);

}  // namespace dicke
