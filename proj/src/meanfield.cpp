#include "dicke/meanfield.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <stdexcept>

namespace dicke {

namespace {
using Cplx = std::complex<double>;
constexpr Cplx I{0.0, 1.0};
using Vec5 = std::array<double, 5>;  // (m_x, m_y, m_z, Re beta, Im beta)

Vec5 pack(const MeanFieldState& s) {
    return {s.m[0], s.m[1], s.m[2], s.beta.real(), s.beta.imag()};
}

MeanFieldState unpack(const Vec5& v) {
    MeanFieldState s;
    s.m = {v[0], v[1], v[2]};
    s.beta = {v[3], v[4]};
    return s;
}

void rhs_raw(const Vec5& v, Vec5& dv, const ModelParams& p) {
    const Eigen::Vector3d m{v[0], v[1], v[2]};
    const Cplx beta{v[3], v[4]};
    const double bx = 2.0 * p.g_bar() * 2.0 * beta.real();
    const double by = 2.0 * p.delta_g() * (-2.0) * beta.imag();  // 2i dg (beta - beta*)
    const Eigen::Vector3d field{bx, by, p.omega_a};
    const Eigen::Vector3d dm = field.cross(m);
    const Cplx dbeta = -(I * p.omega_c + p.kappa) * beta -
                       I * (2.0 * p.g_bar() * m[0] - 2.0 * I * p.delta_g() * m[1]);
    dv = {dm[0], dm[1], dm[2], dbeta.real(), dbeta.imag()};
}

// Orthonormal tangent frame at a point on the sphere; pole-safe.
void tangent_frame(const Eigen::Vector3d& m, Eigen::Vector3d& t1, Eigen::Vector3d& t2) {
    const Eigen::Vector3d n = m.normalized();
    Eigen::Vector3d h = (std::abs(n[2]) < 0.9) ? Eigen::Vector3d{0, 0, 1}
                                               : Eigen::Vector3d{1, 0, 0};
    t1 = n.cross(h).normalized();
    t2 = n.cross(t1);
}

// Newton residual in the 4-dimensional chart (two tangent components of
// m_dot, Re beta_dot, Im beta_dot) at fixed |m| = 1/2.
Eigen::Vector4d chart_residual(const Eigen::Vector4d& x, const Eigen::Vector3d& t1,
                               const Eigen::Vector3d& t2, const Eigen::Vector3d& base,
                               const ModelParams& p) {
    // Point on the sphere reached from `base` by tangent displacement, rescaled.
    Eigen::Vector3d m = base + x[0] * t1 + x[1] * t2;
    m *= 0.5 / m.norm();
    Vec5 v{m[0], m[1], m[2], x[2], x[3]};
    Vec5 dv;
    rhs_raw(v, dv, p);
    const Eigen::Vector3d dm{dv[0], dv[1], dv[2]};
    Eigen::Vector3d u1, u2;
    tangent_frame(m, u1, u2);
    return {dm.dot(u1), dm.dot(u2), dv[3], dv[4]};
}

struct NewtonResult {
    MeanFieldState state;
    double residual = 1e99;
    bool ok = false;
};

NewtonResult newton_polish(MeanFieldState guess, const ModelParams& p) {
    NewtonResult res;
    for (int iter = 0; iter < 80; ++iter) {
        Eigen::Vector3d base = guess.m.normalized() * 0.5;
        Eigen::Vector3d t1, t2;
        tangent_frame(base, t1, t2);
        Eigen::Vector4d x{0.0, 0.0, guess.beta.real(), guess.beta.imag()};
        const Eigen::Vector4d f0 = chart_residual(x, t1, t2, base, p);
        if (f0.norm() < 1e-13) break;

        Eigen::Matrix4d jac;
        const double h = 1e-7;
        for (int c = 0; c < 4; ++c) {
            Eigen::Vector4d xp = x, xm = x;
            xp[c] += h;
            xm[c] -= h;
            jac.col(c) = (chart_residual(xp, t1, t2, base, p) -
                          chart_residual(xm, t1, t2, base, p)) /
                         (2.0 * h);
        }
        Eigen::Vector4d step = jac.fullPivLu().solve(-f0);
        if (!step.allFinite()) break;

        // Backtracking on the residual norm.
        double lambda = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 12; ++bt) {
            Eigen::Vector4d xt = x + lambda * step;
            Eigen::Vector3d mt = base + xt[0] * t1 + xt[1] * t2;
            mt *= 0.5 / mt.norm();
            MeanFieldState cand;
            cand.m = mt;
            cand.beta = {xt[2], xt[3]};
            const Eigen::Vector4d ft = chart_residual(
                {0.0, 0.0, xt[2], xt[3]}, t1, t2, mt, p);
            if (ft.norm() < f0.norm()) {
                guess = cand;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    {
        Eigen::Vector3d base = guess.m.normalized() * 0.5;
        Eigen::Vector3d t1, t2;
        tangent_frame(base, t1, t2);
        guess.m = base;
        res.residual = chart_residual({0.0, 0.0, guess.beta.real(), guess.beta.imag()},
                                      t1, t2, base, p)
                           .norm();
    }
    res.state = guess;
    res.ok = res.residual < 1e-10;
    return res;
}

// Jacobian of the flow projected on the tangent space of the |m| = 1/2 sphere
// plus the two beta directions; the radial direction is excluded because the
// flow conserves |m|.
Eigen::Matrix4d projected_jacobian(const MeanFieldState& fp, const ModelParams& p) {
    Eigen::Vector3d t1, t2;
    tangent_frame(fp.m, t1, t2);
    std::array<Vec5, 4> dirs;
    dirs[0] = {t1[0], t1[1], t1[2], 0.0, 0.0};
    dirs[1] = {t2[0], t2[1], t2[2], 0.0, 0.0};
    dirs[2] = {0.0, 0.0, 0.0, 1.0, 0.0};
    dirs[3] = {0.0, 0.0, 0.0, 0.0, 1.0};

    const Vec5 v0 = pack(fp);
    const double h = 1e-6;
    Eigen::Matrix4d jac;
    for (int c = 0; c < 4; ++c) {
        Vec5 vp = v0, vm = v0;
        for (int k = 0; k < 5; ++k) {
            vp[k] += h * dirs[c][k];
            vm[k] -= h * dirs[c][k];
        }
        Vec5 dp, dm;
        rhs_raw(vp, dp, p);
        rhs_raw(vm, dm, p);
        Vec5 col;
        for (int k = 0; k < 5; ++k) col[k] = (dp[k] - dm[k]) / (2.0 * h);
        const Eigen::Vector3d dmvec{col[0], col[1], col[2]};
        jac(0, c) = dmvec.dot(t1);
        jac(1, c) = dmvec.dot(t2);
        jac(2, c) = col[3];
        jac(3, c) = col[4];
    }
    return jac;
}

}  // namespace

std::string to_string(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::Normal: return "normal";
        case PhaseLabel::Superradiant: return "superradiant";
        case PhaseLabel::Bistable: return "bistable";
        case PhaseLabel::NonStationary: return "nonstationary";
    }
    return "unknown";
}

MeanFieldState meanfield_rhs(const MeanFieldState& state, const ModelParams& params) {
    Vec5 dv;
    rhs_raw(pack(state), dv, params);
    return unpack(dv);
}

MeanFieldTrajectory evolve_meanfield(const MeanFieldState& init, const ModelParams& params,
                                     const std::vector<double>& t_grid,
                                     double rel_tol, double abs_tol) {
    namespace ode = boost::numeric::odeint;
    if (t_grid.empty()) throw std::invalid_argument("evolve_meanfield: empty t_grid");

    auto system = [&params](const Vec5& v, Vec5& dv, double /*t*/) {
        rhs_raw(v, dv, params);
    };

    MeanFieldTrajectory traj;
    traj.t = t_grid;
    traj.states.reserve(t_grid.size());
    Vec5 v = pack(init);

    auto stepper = ode::make_dense_output(abs_tol, rel_tol,
                                          ode::runge_kutta_dopri5<Vec5>());
    ode::integrate_times(stepper, system, v, t_grid.begin(), t_grid.end(), 1e-4,
                         [&traj](const Vec5& state, double /*t*/) {
                             traj.states.push_back(unpack(state));
                         });
    return traj;
}

double critical_coupling(const ModelParams& params) {
    if (params.omega_c <= 0.0)
        throw std::domain_error("critical_coupling: omega_c must be > 0");
    return std::sqrt(params.omega_a * (params.omega_c * params.omega_c +
                                       params.kappa * params.kappa) /
                     params.omega_c);
}

std::vector<FixedPoint> find_fixed_points(const ModelParams& params) {
    params.validate();
    std::vector<FixedPoint> roots;

    auto beta_for_m = [&params](const Eigen::Vector3d& m) {
        return -I * (2.0 * params.g_bar() * m[0] - 2.0 * I * params.delta_g() * m[1]) /
               (I * params.omega_c + params.kappa);
    };

    auto try_add = [&](MeanFieldState guess) {
        NewtonResult nr = newton_polish(std::move(guess), params);
        if (!nr.ok) return;
        for (const auto& r : roots) {
            if ((r.state.m - nr.state.m).norm() +
                    std::abs(r.state.beta - nr.state.beta) <
                1e-6)
                return;
        }
        FixedPoint fp;
        fp.state = nr.state;
        fp.residual = nr.residual;
        const Eigen::Matrix4d jac = projected_jacobian(nr.state, params);
        Eigen::EigenSolver<Eigen::Matrix4d> es(jac);
        fp.eigenvalues = es.eigenvalues();
        fp.stable = true;
        for (int i = 0; i < fp.eigenvalues.size(); ++i) {
            if (fp.eigenvalues[i].real() >= -1e-9) fp.stable = false;
        }
        fp.is_normal = (nr.state.m - Eigen::Vector3d{0, 0, -0.5}).norm() < 1e-6 &&
                       std::abs(nr.state.beta) < 1e-6;
        roots.push_back(std::move(fp));
    };

    // The normal state is a root for all parameters; seed it exactly.
    {
        MeanFieldState normal;
        normal.m = {0.0, 0.0, -0.5};
        normal.beta = 0.0;
        try_add(normal);
    }

    // Multi-start grid over the sphere with the cavity seeded consistently.
    const int n_theta = 9;
    const int n_phi = 8;
    for (int it = 1; it < n_theta; ++it) {
        const double theta = M_PI * double(it) / double(n_theta);
        for (int ip = 0; ip < n_phi; ++ip) {
            const double phi = 2.0 * M_PI * double(ip) / double(n_phi);
            MeanFieldState guess;
            guess.m = 0.5 * Eigen::Vector3d{std::sin(theta) * std::cos(phi),
                                            std::sin(theta) * std::sin(phi),
                                            std::cos(theta)};
            guess.beta = beta_for_m(guess.m);
            try_add(std::move(guess));
        }
    }

    // Deterministic order: normal state first, then by (m_x, m_y, m_z).
    std::sort(roots.begin(), roots.end(), [](const FixedPoint& a, const FixedPoint& b) {
        if (a.is_normal != b.is_normal) return a.is_normal;
        if (a.state.m[0] != b.state.m[0]) return a.state.m[0] > b.state.m[0];
        if (a.state.m[1] != b.state.m[1]) return a.state.m[1] > b.state.m[1];
        return a.state.m[2] > b.state.m[2];
    });
    return roots;
}

PhaseLabel classify_phase(const std::vector<FixedPoint>& fixed_points) {
    bool normal_stable = false;
    bool sr_stable = false;
    bool any_stable = false;
    for (const auto& fp : fixed_points) {
        if (!fp.stable) continue;
        any_stable = true;
        if (fp.is_normal)
            normal_stable = true;
        else
            sr_stable = true;
    }
    if (!any_stable) return PhaseLabel::NonStationary;
    if (normal_stable && sr_stable) return PhaseLabel::Bistable;
    if (sr_stable) return PhaseLabel::Superradiant;
    return PhaseLabel::Normal;
}

PhaseLabel classify_phase(const ModelParams& params) {
    return classify_phase(find_fixed_points(params));
}

MeanFieldState meanfield_from_direction(double theta, double phi) {
    MeanFieldState s;
    s.m = 0.5 * Eigen::Vector3d{std::sin(theta) * std::cos(phi),
                                std::sin(theta) * std::sin(phi), std::cos(theta)};
    s.beta = 0.0;
    return s;
}

}  // namespace dicke
