#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "dicke/model.hpp"

namespace dicke {

// Stationary complex Ornstein-Uhlenbeck path sampled on a uniform grid.
// The stored samples are z_t^* with
//   <z_t^*> = 0,
//   <z_t z_s^*> = (2 g_bar)^2 exp(-i omega_c (t - s) - kappa |t - s|),
//   <z_t z_s>   = 0.
struct OUNoisePath {
    double dt = 0.0;
    std::vector<std::complex<double>> z_conj;
    std::uint64_t seed = 0;
};

// Exact discrete-time update: z*_0 ~ CN(0, (2 g_bar)^2) and
//   z*_{k+1} = z*_k e^{(i omega_c - kappa) dt} + xi_k,
//   xi_k ~ CN(0, (2 g_bar)^2 (1 - e^{-2 kappa dt})),
// which reproduces the target correlation at all lags on the grid. The
// positive sign of omega_c in the update produces the required
// e^{-i omega_c (t-s)} phase of <z_t z_s^*> for t > s.
OUNoisePath sample_ou_path(const ModelParams& params, double dt, std::size_t n_samples,
                           std::uint64_t seed);

inline OUNoisePath sample_ou_path(const ModelParams& params, const std::vector<double>& t_grid,
                                  std::uint64_t seed) {
    if (t_grid.size() < 2) return sample_ou_path(params, 1.0, t_grid.size(), seed);
    return sample_ou_path(params, t_grid[1] - t_grid[0], t_grid.size(), seed);
}

}  // namespace dicke
