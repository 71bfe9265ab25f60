#include "dicke/observables.hpp"

#include <cmath>

namespace dicke {

namespace {
using Cplx = std::complex<double>;

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = xi;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
            const double dx = p1 / dp;
            xi -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        x[i] = xi;
        w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
}

// Coherent-state amplitude column for fixed theta (real part, phi = 0).
Eigen::VectorXd coherent_profile(int N, double theta) {
    Eigen::VectorXd d(N + 1);
    const SpinState cs = spin_coherent_state(N, theta, 0.0);
    for (int k = 0; k <= N; ++k) d[k] = cs.amplitudes[k].real();
    return d;
}

}  // namespace

QFunctionGrid spin_q_function(const SpinDensityMatrix& rho, const std::vector<double>& theta_nodes,
                              const std::vector<double>& phi_nodes) {
    const int dim = static_cast<int>(rho.rho.rows());
    const int N = dim - 1;
    QFunctionGrid grid;
    grid.theta_nodes = theta_nodes;
    grid.phi_nodes = phi_nodes;
    grid.values.resize(static_cast<long>(theta_nodes.size()), static_cast<long>(phi_nodes.size()));

#pragma omp parallel for schedule(static)
    for (long it = 0; it < static_cast<long>(theta_nodes.size()); ++it) {
        const SpinState base = spin_coherent_state(N, theta_nodes[it], 0.0);
        Eigen::VectorXcd c(dim);
        for (long ip = 0; ip < static_cast<long>(phi_nodes.size()); ++ip) {
            const double phi = phi_nodes[ip];
            for (int k = 0; k < dim; ++k)
                c[k] = base.amplitudes[k] * std::exp(Cplx{0.0, phi * k});
            const Cplx q = c.dot(rho.rho * c);
            grid.values(it, ip) = q.real();
        }
    }
    return grid;
}

QFunctionGrid spin_q_function_uniform(const SpinDensityMatrix& rho, int n_theta, int n_phi) {
    std::vector<double> theta(n_theta), phi(n_phi);
    for (int i = 0; i < n_theta; ++i) theta[i] = M_PI * double(i) / double(n_theta - 1);
    for (int i = 0; i < n_phi; ++i) phi[i] = 2.0 * M_PI * double(i) / double(n_phi);
    return spin_q_function(rho, theta, phi);
}

double q_function_normalization(const SpinDensityMatrix& rho) {
    const int dim = static_cast<int>(rho.rho.rows());
    const int N = dim - 1;

    // The phi integral averages away the off-diagonal phases exactly on a
    // uniform periodic grid with more than N points:
    //   (1/2pi) Int Q dphi = sum_m rho_mm d_m(theta)^2.
    // What remains is a polynomial of degree N in cos(theta), integrated
    // exactly by Gauss-Legendre.
    const int n_gl = N / 2 + 2;
    std::vector<double> x, w;
    gauss_legendre(n_gl, x, w);

    double integral = 0.0;
    for (int i = 0; i < n_gl; ++i) {
        const double theta = std::acos(x[i]);
        const Eigen::VectorXd d = coherent_profile(N, theta);
        double q_diag = 0.0;
        for (int k = 0; k < dim; ++k) q_diag += rho.rho(k, k).real() * d[k] * d[k];
        integral += w[i] * q_diag;
    }
    // Int dOmega = Int dphi Int dcos(theta); the phi factor 2pi cancels the
    // 1/(2pi) of the phi average, leaving (N+1)/2 * Int dcos(theta).
    return 0.5 * (N + 1) * integral;
}

std::complex<double> atom_field_covariance(const JointDensityMatrix& rho_tot) {
    ModelParams p;
    p.N = rho_tot.N;
    const JointOperators ops = build_joint_operators(p, rho_tot.n_fock);
    const Cplx sxa = trace_product(ops.sx_a, rho_tot.rho);
    const Cplx sx = trace_product(ops.sx, rho_tot.rho);
    const Cplx a = trace_product(ops.a, rho_tot.rho);
    return sxa - sx * a;
}

SqueezingResult spin_squeezing(const SpinDensityMatrix& rho) {
    const int dim = static_cast<int>(rho.rho.rows());
    const int N = dim - 1;
    ModelParams p;
    p.N = N;
    const SpinOperatorSet ops = build_spin_operators(p);

    const Eigen::MatrixXcd rx = Eigen::MatrixXcd(ops.sx) * rho.rho;
    const Eigen::MatrixXcd ry = Eigen::MatrixXcd(ops.sy) * rho.rho;
    const Eigen::MatrixXcd rz = Eigen::MatrixXcd(ops.sz) * rho.rho;
    const Eigen::Vector3d mean{rx.trace().real(), ry.trace().real(), rz.trace().real()};
    const double norm = mean.norm();
    if (norm <= 1e-9)
        throw DegenerateMeanSpin("spin_squeezing: |<S>| vanishes, direction undefined");

    // Symmetrized second-moment matrix T_ij = <{S_i, S_j}>/2.
    std::array<Eigen::MatrixXcd, 3> sm = {Eigen::MatrixXcd(ops.sx), Eigen::MatrixXcd(ops.sy),
                                          Eigen::MatrixXcd(ops.sz)};
    Eigen::Matrix3d t;
    for (int i = 0; i < 3; ++i) {
        for (int k = i; k < 3; ++k) {
            const Cplx v = (sm[i] * sm[k] * rho.rho).trace();
            const Cplx vr = (sm[k] * sm[i] * rho.rho).trace();
            t(i, k) = 0.5 * (v + vr).real();
            t(k, i) = t(i, k);
        }
    }

    // Orthonormal tangent frame perpendicular to <S>.
    const Eigen::Vector3d n = mean / norm;
    Eigen::Vector3d h = (std::abs(n[2]) < 0.9) ? Eigen::Vector3d{0, 0, 1}
                                               : Eigen::Vector3d{1, 0, 0};
    const Eigen::Vector3d u = n.cross(h).normalized();
    const Eigen::Vector3d v = n.cross(u);

    Eigen::Matrix2d cov;
    cov << u.dot(t * u), u.dot(t * v), v.dot(t * u), v.dot(t * v);
    cov = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const double lam_min = es.eigenvalues()[0];
    const Eigen::Vector2d dir = es.eigenvectors().col(0);

    SqueezingResult res;
    res.xi2 = N * lam_min / (norm * norm);
    res.e_perp = dir[0] * u + dir[1] * v;
    if (res.e_perp[0] < 0 ||
        (res.e_perp[0] == 0 && (res.e_perp[1] < 0 || (res.e_perp[1] == 0 && res.e_perp[2] < 0))))
        res.e_perp = -res.e_perp;  // deterministic sign
    return res;
}

double clebsch_gordan_2j(int tj1, int tj2, int tm1, int tm2, int tJ, int tM) {
    auto bad = [&](const char* why) {
        throw std::domain_error(std::string("clebsch_gordan: ") + why);
    };
    if (tj1 < 0 || tj2 < 0 || tJ < 0) bad("negative angular momentum");
    if ((tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tJ + tM) % 2 != 0)
        bad("m and j must have equal parity");
    if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tM) > tJ) bad("|m| exceeds j");
    if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2 || (tj1 + tj2 + tJ) % 2 != 0)
        return 0.0;  // triangle rule
    if (tm1 + tm2 != tM) return 0.0;

    const double j1 = 0.5 * tj1, j2 = 0.5 * tj2, J = 0.5 * tJ;
    auto cplus = [](double j, double m) { return std::sqrt(j * (j + 1.0) - m * (m + 1.0)); };
    auto cminus = [](double j, double m) { return std::sqrt(j * (j + 1.0) - m * (m - 1.0)); };

    // Stretched row M = J from J+ |J,J> = 0, highest-m1 coefficient positive:
    //   C_{m1-1, M-m1+1} = -C_{m1, M-m1} cplus(j2, M-m1) / cplus(j1, m1-1).
    const double m1_max = std::min(j1, J + j2);
    const double m1_min = std::max(-j1, J - j2);
    const int n_top = static_cast<int>(std::lround(m1_max - m1_min)) + 1;
    std::vector<double> row(n_top);  // index i corresponds to m1 = m1_max - i
    row[0] = 1.0;
    for (int i = 1; i < n_top; ++i) {
        const double m1 = m1_max - i + 1.0;  // previous m1
        row[i] = -row[i - 1] * cplus(j2, J - m1) / cplus(j1, m1 - 1.0);
    }
    double nrm = 0.0;
    for (double c : row) nrm += c * c;
    for (double& c : row) c /= std::sqrt(nrm);

    // Lower M by the J- ladder:
    //   cminus(J, M+1) C_{m1,m2}(M) = cminus(j1, m1+1) C_{m1+1,m2}(M+1)
    //                               + cminus(j2, m2+1) C_{m1,m2+1}(M+1).
    double M_cur = J;
    const double M_target = 0.5 * tM;
    std::vector<double> cur = row;
    double cur_m1_max = m1_max;
    while (M_cur > M_target + 0.25) {
        const double M_next = M_cur - 1.0;
        const double next_m1_max = std::min(j1, M_next + j2);
        const double next_m1_min = std::max(-j1, M_next - j2);
        const int n_next = static_cast<int>(std::lround(next_m1_max - next_m1_min)) + 1;
        std::vector<double> next(n_next, 0.0);
        const double denom = cminus(J, M_cur);
        for (int i = 0; i < n_next; ++i) {
            const double m1 = next_m1_max - i;
            const double m2 = M_next - m1;
            double acc = 0.0;
            const double im1p = cur_m1_max - (m1 + 1.0);
            if (m1 + 1.0 <= j1 + 0.25 && im1p > -0.25 &&
                im1p < static_cast<double>(cur.size()) - 0.75) {
                acc += cminus(j1, m1 + 1.0) * cur[static_cast<int>(std::lround(im1p))];
            }
            const double im2p = cur_m1_max - m1;
            if (m2 + 1.0 <= j2 + 0.25 && im2p > -0.25 &&
                im2p < static_cast<double>(cur.size()) - 0.75) {
                acc += cminus(j2, m2 + 1.0) * cur[static_cast<int>(std::lround(im2p))];
            }
            next[i] = acc / denom;
        }
        cur = std::move(next);
        cur_m1_max = next_m1_max;
        M_cur = M_next;
    }

    const double idx = cur_m1_max - 0.5 * tm1;
    const int i = static_cast<int>(std::lround(idx));
    if (i < 0 || i >= static_cast<int>(cur.size())) return 0.0;
    return cur[i];
}

Eigen::MatrixXd two_spin_embedding(int N, int twice_j_half) {
    const int d_half = twice_j_half + 1;
    const int dim = N + 1;
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(d_half * d_half, dim);
    const int tJ = N;  // couple to the maximal sector J = N/2
    for (int k = 0; k < dim; ++k) {
        const int tM = tJ - 2 * k;
        for (int i1 = 0; i1 < d_half; ++i1) {
            const int tm1 = twice_j_half - 2 * i1;
            const int tm2 = tM - tm1;
            if (std::abs(tm2) > twice_j_half) continue;
            const int i2 = (twice_j_half - tm2) / 2;
            e(i1 * d_half + i2, k) =
                clebsch_gordan_2j(twice_j_half, twice_j_half, tm1, tm2, tJ, tM);
        }
    }
    return e;
}

double bipartite_negativity_2j(const SpinDensityMatrix& rho, int N, int twice_j_half) {
    const int d_half = twice_j_half + 1;
    const Eigen::MatrixXd e = two_spin_embedding(N, twice_j_half);
    const Eigen::MatrixXcd rho2 = e * rho.rho * e.transpose();

    // Partial transpose on the second factor.
    Eigen::MatrixXcd pt(rho2.rows(), rho2.cols());
    for (int a1 = 0; a1 < d_half; ++a1)
        for (int a2 = 0; a2 < d_half; ++a2)
            for (int b1 = 0; b1 < d_half; ++b1)
                for (int b2 = 0; b2 < d_half; ++b2)
                    pt(a1 * d_half + b2, a2 * d_half + b1) =
                        rho2(a1 * d_half + b1, a2 * d_half + b2);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (pt + pt.adjoint()));
    double neg = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        neg += std::max(0.0, -es.eigenvalues()[i]);
    return neg;
}

double bipartite_negativity(const SpinDensityMatrix& rho, int N) {
    if (N % 4 != 0)
        throw std::domain_error("bipartite_negativity: N must be divisible by 4");
    return bipartite_negativity_2j(rho, N, N / 2);  // j_half = N/4, twice that is N/2
}

}  // namespace dicke
