#pragma once

#include <stdexcept>
#include <string>

namespace dicke {

// Constants of the open Dicke model in units of a reference frequency
// (hbar = 1). g_plus/g_minus are the counter- and co-rotating couplings;
// g_plus == g_minus is the balanced model, g_plus == 0 the Tavis-Cummings
// limit.
struct ModelParams {
    int N = 1;             // atom count, total spin j = N/2
    double omega_a = 1.0;  // atomic splitting
    double omega_c = 1.0;  // cavity frequency
    double kappa = 0.0;    // cavity amplitude decay rate
    double g_plus = 0.0;
    double g_minus = 0.0;

    double g_bar() const { return 0.5 * (g_plus + g_minus); }
    double delta_g() const { return 0.5 * (g_minus - g_plus); }
    double spin_j() const { return 0.5 * static_cast<double>(N); }

    // Ratio delta_g/g_bar entering the coupling operator
    // L = Sx - i (delta_g/g_bar) Sy. Zero coupling is treated as balanced.
    double coupling_ratio() const {
        if (g_bar() > 0.0) return delta_g() / g_bar();
        if (delta_g() == 0.0) return 0.0;
        throw std::domain_error("ModelParams: coupling operator needs g_bar > 0");
    }

    void validate() const {
        if (N < 1) throw std::domain_error("ModelParams: N must be >= 1");
        if (kappa < 0.0) throw std::domain_error("ModelParams: kappa must be >= 0");
        if (g_plus < 0.0 || g_minus < 0.0)
            throw std::domain_error("ModelParams: couplings must be >= 0");
    }
};

// Balanced parameter set with total coupling 2*g_bar = coupling_2g.
inline ModelParams balanced_params(int n, double omega_a, double omega_c,
                                   double kappa, double coupling_2g) {
    ModelParams p;
    p.N = n;
    p.omega_a = omega_a;
    p.omega_c = omega_c;
    p.kappa = kappa;
    p.g_plus = 0.5 * coupling_2g;
    p.g_minus = 0.5 * coupling_2g;
    return p;
}

}  // namespace dicke
