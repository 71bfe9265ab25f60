#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "dicke/model.hpp"

namespace dicke {

// Magnetization m = <S>/N and scaled cavity amplitude beta = <a>/sqrt(N).
struct MeanFieldState {
    Eigen::Vector3d m = Eigen::Vector3d::Zero();
    std::complex<double> beta{0.0, 0.0};
};

enum class PhaseLabel { Normal, Superradiant, Bistable, NonStationary };

std::string to_string(PhaseLabel label);

// Equations of motion factorized from the full model:
//   m_dot    = B x m,  B = (2 g_bar (beta + beta*), 2i delta_g (beta - beta*), omega_a)
//   beta_dot = -(i omega_c + kappa) beta - i (2 g_bar m_x - 2i delta_g m_y).
// The balanced case delta_g = 0 is the textbook form with g = 2 g_bar.
MeanFieldState meanfield_rhs(const MeanFieldState& state, const ModelParams& params);

struct MeanFieldTrajectory {
    std::vector<double> t;
    std::vector<MeanFieldState> states;
};

// Adaptive Dormand-Prince integration, sampled exactly at t_grid.
MeanFieldTrajectory evolve_meanfield(const MeanFieldState& init, const ModelParams& params,
                                     const std::vector<double>& t_grid,
                                     double rel_tol = 1e-11, double abs_tol = 1e-12);

// g_c = sqrt(omega_a (omega_c^2 + kappa^2) / omega_c); the normal state is the
// unique stable balanced fixed point for 2 g_bar < g_c.
double critical_coupling(const ModelParams& params);

struct FixedPoint {
    MeanFieldState state;
    bool stable = false;
    Eigen::VectorXcd eigenvalues;  // of the flow restricted to |m| = 1/2
    double residual = 0.0;
    bool is_normal = false;
};

std::vector<FixedPoint> find_fixed_points(const ModelParams& params);

PhaseLabel classify_phase(const ModelParams& params);
PhaseLabel classify_phase(const std::vector<FixedPoint>& fixed_points);

// Initial condition on the |m| = 1/2 sphere in the (theta, phi) direction.
MeanFieldState meanfield_from_direction(double theta, double phi);

}  // namespace dicke
