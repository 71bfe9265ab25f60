// Equations of motion for the second-order cumulant closure.
//
// The Hamiltonian is written as
//     H = omega_a S3 + S1 G1 + S2 G2 + omega_c n,
//     G1 = cx (a + a^dag),  G2 = i cy (a - a^dag),
//     cx = 2 g_bar / sqrt(N),  cy = 2 delta_g / sqrt(N),
// and the adjoint dissipator is kappa (2 a^dag X a - {n, X}). With
// [S_i, S_j] = i eps_ijk S_k the moment equations follow from
// d<X>/dt = -i<[X, H]> + kappa <2 a^dag X a - {n, X}>. Because H is linear
// in the spin operators, third moments appear only as spin x field x field
// and spin x spin x field products; each is replaced by the Gaussian closure
//     <ABC> -> <AB><C> + <AC><B> + <BC><A> - 2<A><B><C>
// applied in the written operator order. The non-symmetrized spin moments
// needed along the way are recovered exactly from
//     <S_i S_k> = V_ik + (i/2) eps_ikl <S_l>.

#include "dicke/cumulant.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <stdexcept>

namespace dicke {

namespace {
using Cplx = std::complex<double>;
constexpr Cplx I{0.0, 1.0};

double eps(int i, int j, int k) {
    if (i == j || j == k || i == k) return 0.0;
    return ((j - i + 3) % 3 == 1) ? 1.0 : -1.0;  // cyclic (i,j,k) -> +1
}

struct ClosureContext {
    const MomentVector& m;

    Cplx ss(int i, int k) const {  // <S_i S_k>
        Cplx val{m.v(i, k), 0.0};
        for (int l = 0; l < 3; ++l) val += 0.5 * I * eps(i, k, l) * m.s[l];
        return val;
    }
    Cplx ssa(int i, int k) const {  // <S_i S_k a>
        return ss(i, k) * m.alpha + m.f[i] * m.s[k] + m.f[k] * m.s[i] -
               2.0 * m.s[i] * m.s[k] * m.alpha;
    }
    Cplx ssad(int i, int k) const {  // <S_i S_k a^dag>
        return ss(i, k) * std::conj(m.alpha) + std::conj(m.f[i]) * m.s[k] +
               std::conj(m.f[k]) * m.s[i] - 2.0 * m.s[i] * m.s[k] * std::conj(m.alpha);
    }
    Cplx sa2(int k) const {  // <S_k a^2>
        return m.a2 * m.s[k] + 2.0 * m.f[k] * m.alpha - 2.0 * m.s[k] * m.alpha * m.alpha;
    }
    Cplx sn(int k) const {  // <S_k a^dag a>
        return m.nbar * m.s[k] + std::conj(m.f[k]) * m.alpha +
               m.f[k] * std::conj(m.alpha) - 2.0 * m.s[k] * std::norm(m.alpha);
    }
};

struct ClosureDiverged {};

}  // namespace

std::array<double, MomentVector::kSize> MomentVector::pack() const {
    return {s[0], s[1], s[2],
            alpha.real(), alpha.imag(),
            a2.real(), a2.imag(),
            nbar,
            f[0].real(), f[0].imag(), f[1].real(), f[1].imag(), f[2].real(), f[2].imag(),
            v(0, 0), v(0, 1), v(0, 2), v(1, 1), v(1, 2), v(2, 2)};
}

MomentVector MomentVector::unpack(const std::array<double, kSize>& x) {
    MomentVector m;
    m.s = {x[0], x[1], x[2]};
    m.alpha = {x[3], x[4]};
    m.a2 = {x[5], x[6]};
    m.nbar = x[7];
    m.f = {Cplx{x[8], x[9]}, Cplx{x[10], x[11]}, Cplx{x[12], x[13]}};
    m.v << x[14], x[15], x[16],
           x[15], x[17], x[18],
           x[16], x[18], x[19];
    return m;
}

MomentVector moments_from_product_state(const SpinState& spin, const ModelParams& params) {
    const SpinOperatorSet ops = build_spin_operators(params);
    const Eigen::VectorXcd& psi = spin.amplitudes;
    std::array<Eigen::VectorXcd, 3> sv = {ops.sx * psi, ops.sy * psi, ops.sz * psi};

    MomentVector m;
    for (int i = 0; i < 3; ++i) m.s[i] = psi.dot(sv[i]).real();
    for (int i = 0; i < 3; ++i) {
        for (int k = i; k < 3; ++k) {
            const double sym = 0.5 * (sv[i].dot(sv[k]) + sv[k].dot(sv[i])).real();
            m.v(i, k) = sym;
            m.v(k, i) = sym;
        }
    }
    // Cavity vacuum: every moment containing a field operator vanishes.
    return m;
}

MomentVector factorized_moments(const Eigen::Vector3d& s, Cplx alpha) {
    MomentVector m;
    m.s = s;
    m.alpha = alpha;
    m.a2 = alpha * alpha;
    m.nbar = std::norm(alpha);
    for (int i = 0; i < 3; ++i) m.f[i] = alpha * s[i];
    m.v = s * s.transpose();
    return m;
}

MomentVector cumulant_rhs(const MomentVector& mv, const ModelParams& params) {
    const double cx = 2.0 * params.g_bar() / std::sqrt(double(params.N));
    const double cy = 2.0 * params.delta_g() / std::sqrt(double(params.N));
    const double wa = params.omega_a;
    const Cplx decay = I * params.omega_c + params.kappa;
    const ClosureContext c{mv};

    MomentVector d;

    // d<S_i> = wa eps_i3k s_k + eps_i1k <S_k G1> + eps_i2k <S_k G2>
    for (int i = 0; i < 3; ++i) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k) {
            acc += wa * eps(i, 2, k) * mv.s[k];
            acc += eps(i, 0, k) * 2.0 * cx * mv.f[k].real();
            acc += eps(i, 1, k) * (-2.0 * cy * mv.f[k].imag());
        }
        d.s[i] = acc;
    }

    d.alpha = -decay * mv.alpha - I * cx * mv.s[0] - cy * mv.s[1];
    d.a2 = -2.0 * decay * mv.a2 - 2.0 * I * cx * mv.f[0] - 2.0 * cy * mv.f[1];
    d.nbar = -2.0 * params.kappa * mv.nbar - 2.0 * cx * mv.f[0].imag() -
             2.0 * cy * mv.f[1].real();

    // d<a S_i> = -(i wc + kappa) F_i + wa eps_i3k F_k
    //          + eps_i1k cx (<S_k a^2> + <S_k n> + s_k)
    //          + eps_i2k i cy (<S_k a^2> - <S_k n> - s_k)
    //          - i cx <S_1 S_i> - cy <S_2 S_i>
    for (int i = 0; i < 3; ++i) {
        Cplx acc = -decay * mv.f[i];
        for (int k = 0; k < 3; ++k) {
            acc += wa * eps(i, 2, k) * mv.f[k];
            acc += eps(i, 0, k) * cx * (c.sa2(k) + c.sn(k) + mv.s[k]);
            acc += eps(i, 1, k) * I * cy * (c.sa2(k) - c.sn(k) - mv.s[k]);
        }
        acc += -I * cx * c.ss(0, i) - cy * c.ss(1, i);
        d.f[i] = acc;
    }

    // d<S_i S_j> = wa (eps_j3k <S_i S_k> + eps_i3k <S_k S_j>)
    //            + eps_j1k cx (<S_i S_k a> + <S_i S_k a^dag>)
    //            + eps_i1k cx (<S_k S_j a> + <S_k S_j a^dag>)
    //            + eps_j2k i cy (<S_i S_k a> - <S_i S_k a^dag>)
    //            + eps_i2k i cy (<S_k S_j a> - <S_k S_j a^dag>);
    // the symmetrized moment keeps only the real part.
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            auto dss = [&](int a, int b) {
                Cplx acc{0.0, 0.0};
                for (int k = 0; k < 3; ++k) {
                    acc += wa * (eps(b, 2, k) * c.ss(a, k) + eps(a, 2, k) * c.ss(k, b));
                    acc += eps(b, 0, k) * cx * (c.ssa(a, k) + c.ssad(a, k));
                    acc += eps(a, 0, k) * cx * (c.ssa(k, b) + c.ssad(k, b));
                    acc += eps(b, 1, k) * I * cy * (c.ssa(a, k) - c.ssad(a, k));
                    acc += eps(a, 1, k) * I * cy * (c.ssa(k, b) - c.ssad(k, b));
                }
                return acc;
            };
            const double dv = 0.5 * (dss(i, j) + dss(j, i)).real();
            d.v(i, j) = dv;
            d.v(j, i) = dv;
        }
    }
    return d;
}

CumulantTrajectory evolve_cumulant(const MomentVector& mv0, const ModelParams& params,
                                   const std::vector<double>& t_grid,
                                   double rel_tol, double abs_tol) {
    namespace ode = boost::numeric::odeint;
    if (t_grid.empty()) throw std::invalid_argument("evolve_cumulant: empty t_grid");
    using State = std::array<double, MomentVector::kSize>;

    const double bound = 1e6 * double(params.N);
    auto system = [&params, bound](const State& x, State& dx, double /*t*/) {
        for (double xi : x) {
            if (!std::isfinite(xi) || std::abs(xi) > bound) throw ClosureDiverged{};
        }
        const MomentVector d = cumulant_rhs(MomentVector::unpack(x), params);
        dx = d.pack();
    };

    CumulantTrajectory traj;
    State x = mv0.pack();
    auto stepper = ode::make_dense_output(abs_tol, rel_tol,
                                          ode::runge_kutta_dopri5<State>());
    try {
        ode::integrate_times(stepper, system, x, t_grid.begin(), t_grid.end(), 1e-4,
                             [&traj](const State& state, double t) {
                                 traj.t.push_back(t);
                                 traj.moments.push_back(MomentVector::unpack(state));
                             });
    } catch (const ClosureDiverged&) {
        traj.diverged = true;
    }
    return traj;
}

}  // namespace dicke
