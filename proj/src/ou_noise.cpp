#include "dicke/ou_noise.hpp"

#include <cmath>

#include "dicke/rng.hpp"

namespace dicke {

OUNoisePath sample_ou_path(const ModelParams& params, double dt, std::size_t n_samples,
                           std::uint64_t seed) {
    OUNoisePath path;
    path.dt = dt;
    path.seed = seed;
    path.z_conj.resize(n_samples);
    if (n_samples == 0) return path;

    Rng rng(seed);
    const double var = 4.0 * params.g_bar() * params.g_bar();
    path.z_conj[0] = rng.next_complex_gaussian(var);

    const std::complex<double> decay =
        std::exp(std::complex<double>(-params.kappa, params.omega_c) * dt);
    const double step_var = var * (1.0 - std::exp(-2.0 * params.kappa * dt));
    for (std::size_t k = 1; k < n_samples; ++k) {
        path.z_conj[k] = path.z_conj[k - 1] * decay + rng.next_complex_gaussian(step_var);
    }
    return path;
}

}  // namespace dicke
