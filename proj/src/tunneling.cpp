#include "dicke/tunneling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace dicke {

namespace {

// Weighted Levenberg-Marquardt for a small parameter vector.
struct LmProblem {
    std::vector<double> data;
    std::vector<double> weight;  // 1/variance
    std::vector<double> t;
    // model(p, t)
    std::function<double(const Eigen::VectorXd&, double)> model;
};

struct LmResult {
    Eigen::VectorXd p;
    Eigen::MatrixXd covariance;
    double cost = 0.0;
};

double lm_cost(const LmProblem& prob, const Eigen::VectorXd& p) {
    double c = 0.0;
    for (std::size_t i = 0; i < prob.data.size(); ++i) {
        const double r = prob.model(p, prob.t[i]) - prob.data[i];
        c += prob.weight[i] * r * r;
    }
    return c;
}

LmResult lm_fit(const LmProblem& prob, Eigen::VectorXd p0) {
    const int np = static_cast<int>(p0.size());
    const int nd = static_cast<int>(prob.data.size());
    Eigen::VectorXd p = p0;
    double cost = lm_cost(prob, p);
    double lambda = 1e-3;

    Eigen::MatrixXd jac(nd, np);
    Eigen::VectorXd res(nd);
    for (int iter = 0; iter < 300; ++iter) {
        for (int i = 0; i < nd; ++i) {
            const double sw = std::sqrt(prob.weight[i]);
            res[i] = sw * (prob.model(p, prob.t[i]) - prob.data[i]);
            for (int c = 0; c < np; ++c) {
                const double h = std::max(1e-10, 1e-7 * std::abs(p[c]));
                Eigen::VectorXd pp = p, pm = p;
                pp[c] += h;
                pm[c] = std::max(0.0, pm[c] - h);
                const double denom = pp[c] - pm[c];
                jac(i, c) = sw *
                            (prob.model(pp, prob.t[i]) - prob.model(pm, prob.t[i])) / denom;
            }
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * res;
        bool improved = false;
        for (int tries = 0; tries < 25; ++tries) {
            Eigen::MatrixXd damped = jtj;
            for (int c = 0; c < np; ++c) damped(c, c) += lambda * std::max(jtj(c, c), 1e-12);
            const Eigen::VectorXd step = damped.ldlt().solve(-g);
            Eigen::VectorXd cand = p + step;
            for (int c = 0; c < np; ++c) cand[c] = std::max(0.0, cand[c]);
            const double cand_cost = lm_cost(prob, cand);
            if (cand_cost <= cost) {
                const double delta = (cand - p).norm();
                p = cand;
                const double gain = cost - cand_cost;
                cost = cand_cost;
                lambda = std::max(1e-12, lambda / 3.0);
                improved = true;
                if (delta < 1e-13 * (1.0 + p.norm()) || gain < 1e-18 * (1.0 + cost)) {
                    iter = 1000;  // converged
                }
                break;
            }
            lambda *= 2.5;
        }
        if (!improved) break;
        if (iter >= 1000) break;
    }

    LmResult out;
    out.p = p;
    out.cost = cost;
    for (int i = 0; i < nd; ++i) {
        const double sw = std::sqrt(prob.weight[i]);
        for (int c = 0; c < np; ++c) {
            const double h = std::max(1e-10, 1e-7 * std::abs(p[c]));
            Eigen::VectorXd pp = p, pm = p;
            pp[c] += h;
            pm[c] = std::max(0.0, pm[c] - h);
            jac(i, c) = sw * (prob.model(pp, prob.t[i]) - prob.model(pm, prob.t[i])) /
                        (pp[c] - pm[c]);
        }
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    out.covariance = jtj.fullPivLu().inverse();
    return out;
}

double regularized_variance(double p_hat, int n) {
    const double k = p_hat * n;
    const double p_tilde = (k + 0.5) / (double(n) + 1.0);
    return p_tilde * (1.0 - p_tilde) / double(n);
}

}  // namespace

ClassifierReference ClassifierReference::from_fixed_points(const std::vector<FixedPoint>& fps) {
    ClassifierReference ref;
    for (const auto& fp : fps) {
        if (fp.is_normal) {
            ref.normal = fp.state.m;
        } else if (fp.stable) {
            ref.superradiant.push_back(fp.state.m);
        }
    }
    if (ref.superradiant.empty())
        throw std::runtime_error("classifier: no stable superradiant fixed point");
    return ref;
}

std::vector<MetastablePhase> classify_state(const TrajectoryRecord& record,
                                            const ClassifierReference& ref,
                                            double window_time) {
    const std::size_t n = record.t.size();
    std::vector<MetastablePhase> labels(n);
    if (n == 0) return labels;
    const double inv_n = 1.0 / double(record.params.N);

    // Trailing moving average over [t - window_time, t] via prefix sums.
    std::vector<double> cx(n + 1, 0.0), cy(n + 1, 0.0), cz(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        cx[i + 1] = cx[i] + record.sx[i] * inv_n;
        cy[i + 1] = cy[i] + record.sy[i] * inv_n;
        cz[i + 1] = cz[i] + record.sz[i] * inv_n;
    }
    std::size_t lo = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (record.t[i] - record.t[lo] > window_time) ++lo;
        const double cnt = double(i - lo + 1);
        const Eigen::Vector3d avg{(cx[i + 1] - cx[lo]) / cnt, (cy[i + 1] - cy[lo]) / cnt,
                                  (cz[i + 1] - cz[lo]) / cnt};
        double best = (avg - ref.normal).squaredNorm();
        MetastablePhase phase = MetastablePhase::Normal;
        for (const auto& sr : ref.superradiant) {
            const double d = (avg - sr).squaredNorm();
            if (d < best) {
                best = d;
                phase = MetastablePhase::Superradiant;
            }
        }
        labels[i] = phase;
    }
    return labels;
}

OccupationCurves occupation_curves(const std::vector<std::vector<MetastablePhase>>& labels,
                                   const std::vector<double>& t) {
    if (labels.empty()) throw std::invalid_argument("occupation_curves: no trajectories");
    const std::size_t nt = t.size();
    OccupationCurves oc;
    oc.t = t;
    oc.n_traj = static_cast<int>(labels.size());
    oc.p_s.assign(nt, 0.0);
    oc.p_n.assign(nt, 0.0);
    oc.se.assign(nt, 0.0);
    for (const auto& lab : labels) {
        if (lab.size() != nt)
            throw std::invalid_argument("occupation_curves: label/grid size mismatch");
        for (std::size_t i = 0; i < nt; ++i)
            if (lab[i] == MetastablePhase::Superradiant) oc.p_s[i] += 1.0;
    }
    for (std::size_t i = 0; i < nt; ++i) {
        oc.p_s[i] /= double(oc.n_traj);
        oc.p_n[i] = 1.0 - oc.p_s[i];
        oc.se[i] = std::sqrt(std::max(0.0, oc.p_s[i] * oc.p_n[i] / double(oc.n_traj)));
    }
    oc.initial_phase =
        (oc.p_s[0] > 0.5) ? MetastablePhase::Superradiant : MetastablePhase::Normal;
    return oc;
}

std::pair<double, double> rate_solution(double gamma_ns, double gamma_sn, double p_n0,
                                        double p_s0, double t) {
    const double total = 2.0 * gamma_ns + gamma_sn;
    if (total <= 0.0) return {p_n0, p_s0};
    const double p_n = gamma_sn / total +
                       (2.0 * gamma_ns * p_n0 - gamma_sn * p_s0) / total * std::exp(-total * t);
    return {p_n, 1.0 - p_n};
}

std::vector<Eigen::Vector3d> rate_ode_full(double gamma_ns, double gamma_sn, double gamma_ss,
                                           const Eigen::Vector3d& p0,
                                           const std::vector<double>& t_grid) {
    if (gamma_ns < 0 || gamma_sn < 0 || gamma_ss < 0)
        throw std::domain_error("rate_ode_full: rates must be >= 0");
    auto rhs = [&](const Eigen::Vector3d& p) {
        // p = (p_n, p_s+, p_s-)
        Eigen::Vector3d d;
        d[0] = -2.0 * gamma_ns * p[0] + gamma_sn * (p[1] + p[2]);
        d[1] = -(gamma_sn + gamma_ss) * p[1] + gamma_ss * p[2] + gamma_ns * p[0];
        d[2] = -(gamma_sn + gamma_ss) * p[2] + gamma_ss * p[1] + gamma_ns * p[0];
        return d;
    };

    std::vector<Eigen::Vector3d> out;
    out.reserve(t_grid.size());
    Eigen::Vector3d p = p0;
    double t = t_grid.empty() ? 0.0 : t_grid.front();
    out.push_back(p);
    const double rate_scale = std::max({gamma_ns, gamma_sn, gamma_ss, 1e-3});
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double span = t_grid[i] - t;
        const int steps = std::max(int(std::ceil(span * 50.0)),
                                   int(std::ceil(span * rate_scale * 300.0)));
        const double h = span / steps;
        for (int k = 0; k < steps; ++k) {
            const Eigen::Vector3d k1 = rhs(p);
            const Eigen::Vector3d k2 = rhs(p + 0.5 * h * k1);
            const Eigen::Vector3d k3 = rhs(p + 0.5 * h * k2);
            const Eigen::Vector3d k4 = rhs(p + h * k3);
            p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        t = t_grid[i];
        out.push_back(p);
    }
    return out;
}

RateFit fit_rates(const OccupationCurves& normal_start, const OccupationCurves& sr_start) {
    if (normal_start.initial_phase != MetastablePhase::Normal ||
        sr_start.initial_phase != MetastablePhase::Superradiant)
        throw std::invalid_argument("fit_rates: curves must be (normal start, SR start)");

    const double t_end = std::max(normal_start.t.back(), sr_start.t.back());
    const double max_ps = *std::max_element(normal_start.p_s.begin(), normal_start.p_s.end());
    const double max_pn = *std::max_element(sr_start.p_n.begin(), sr_start.p_n.end());
    const bool ns_events = max_ps > 0.0;
    const bool sn_events = max_pn > 0.0;

    RateFit fit;
    if (!ns_events) {
        fit.status_ns = RateStatus::UpperBound;
        fit.gamma_ns = -std::log(1.0 - 1.0 / double(normal_start.n_traj)) / t_end;
    }
    if (!sn_events) {
        fit.status_sn = RateStatus::UpperBound;
        fit.gamma_sn = -std::log(1.0 - 1.0 / double(sr_start.n_traj)) / t_end;
    }
    if (!ns_events && !sn_events) return fit;

    // Joint residual vector: p_s(t) for the normal start followed by p_n(t)
    // for the superradiant start; time values are tagged by sign to pick the
    // branch inside the shared model callback.
    LmProblem prob;
    auto add_curve = [&prob](const OccupationCurves& oc, bool use_ps, double tag) {
        for (std::size_t i = 0; i < oc.t.size(); ++i) {
            prob.t.push_back(tag * (oc.t[i] + 1.0));
            prob.data.push_back(use_ps ? oc.p_s[i] : oc.p_n[i]);
            prob.weight.push_back(
                1.0 / regularized_variance(use_ps ? oc.p_s[i] : oc.p_n[i], oc.n_traj));
        }
    };
    add_curve(normal_start, true, +1.0);
    add_curve(sr_start, false, -1.0);

    const bool fit_ns = ns_events;
    const bool fit_sn = sn_events;

    prob.model = [=](const Eigen::VectorXd& p, double tagged_t) {
        int idx = 0;
        const double gns = fit_ns ? p[idx++] : 0.0;
        const double gsn = fit_sn ? p[idx++] : 0.0;
        const double t = std::abs(tagged_t) - 1.0;
        if (tagged_t > 0.0) return rate_solution(gns, gsn, 1.0, 0.0, t).second;  // p_s
        return rate_solution(gns, gsn, 0.0, 1.0, t).first;                       // p_n
    };

    // Initial guess from the final-time fractions and the horizon.
    std::vector<double> guess;
    if (fit_ns) guess.push_back(std::max(1e-8, normal_start.p_s.back() / (2.0 * t_end)));
    if (fit_sn) guess.push_back(std::max(1e-8, sr_start.p_n.back() / t_end));
    Eigen::VectorXd p0(static_cast<int>(guess.size()));
    for (std::size_t i = 0; i < guess.size(); ++i) p0[static_cast<int>(i)] = guess[i];

    const LmResult lm = lm_fit(prob, p0);
    int idx = 0;
    if (fit_ns) {
        fit.gamma_ns = lm.p[idx];
        fit.sigma_ns = std::sqrt(std::max(0.0, lm.covariance(idx, idx)));
        ++idx;
    }
    if (fit_sn) {
        fit.gamma_sn = lm.p[idx];
        fit.sigma_sn = std::sqrt(std::max(0.0, lm.covariance(idx, idx)));
    }
    if (fit_ns && fit_sn) fit.covariance = lm.covariance;
    fit.residual_norm = std::sqrt(lm.cost);
    return fit;
}

ExponentFit fit_exponents(const std::vector<std::pair<int, RateFit>>& rates) {
    ExponentFit out;
    auto regress = [](const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& w, double& a, double& r, double& sr) {
        double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sw += w[i];
            swx += w[i] * x[i];
            swy += w[i] * y[i];
            swxx += w[i] * x[i] * x[i];
            swxy += w[i] * x[i] * y[i];
        }
        const double det = sw * swxx - swx * swx;
        r = (sw * swxy - swx * swy) / det;
        a = std::exp((swxx * swy - swx * swxy) / det);
        sr = std::sqrt(std::max(0.0, sw / det));
    };

    std::vector<double> xn, yn, wn, xs, ys, wsv;
    for (const auto& [n, fit] : rates) {
        if (fit.status_ns == RateStatus::Ok && fit.gamma_ns > 0.0) {
            xn.push_back(double(n));
            yn.push_back(std::log(fit.gamma_ns));
            const double sy = std::max(1e-6, fit.sigma_ns / fit.gamma_ns);
            wn.push_back(1.0 / (sy * sy));
        }
        if (fit.status_sn == RateStatus::Ok && fit.gamma_sn > 0.0) {
            xs.push_back(double(n));
            ys.push_back(std::log(fit.gamma_sn));
            const double sy = std::max(1e-6, fit.sigma_sn / fit.gamma_sn);
            wsv.push_back(1.0 / (sy * sy));
        }
    }
    out.n_points_ns = static_cast<int>(xn.size());
    out.n_points_sn = static_cast<int>(xs.size());
    if (out.n_points_ns >= 2) regress(xn, yn, wn, out.a_ns, out.r_ns, out.sigma_r_ns);
    if (out.n_points_sn >= 2) regress(xs, ys, wsv, out.a_sn, out.r_sn, out.sigma_r_sn);
    return out;
}

std::optional<double> exponent_crossing(const std::vector<double>& s_values,
                                        const std::vector<ExponentFit>& fits) {
    for (std::size_t i = 1; i < s_values.size(); ++i) {
        const double d0 = fits[i - 1].r_ns - fits[i - 1].r_sn;
        const double d1 = fits[i].r_ns - fits[i].r_sn;
        if (d0 == 0.0) return s_values[i - 1];
        if (d0 * d1 < 0.0) {
            return s_values[i - 1] + (s_values[i] - s_values[i - 1]) * d0 / (d0 - d1);
        }
    }
    return std::nullopt;
}

CutSpec locate_cut(const ModelParams& base, double g_minus, double g_plus_min,
                   double g_plus_max, double tol) {
    auto probe = [&](double g_plus) {
        ModelParams p = base;
        p.g_minus = g_minus;
        p.g_plus = g_plus;
        const auto fps = find_fixed_points(p);
        bool normal_stable = false, sr_stable = false;
        for (const auto& fp : fps) {
            if (fp.is_normal && fp.stable) normal_stable = true;
            if (!fp.is_normal && fp.stable) sr_stable = true;
        }
        return std::make_pair(normal_stable, sr_stable);
    };

    const int n_scan = 61;
    std::vector<double> g(n_scan);
    std::vector<std::pair<bool, bool>> st(n_scan);
    int first_bi = -1, last_bi = -1;
    for (int i = 0; i < n_scan; ++i) {
        g[i] = g_plus_min + (g_plus_max - g_plus_min) * double(i) / double(n_scan - 1);
        st[i] = probe(g[i]);
        if (st[i].first && st[i].second) {
            if (first_bi < 0) first_bi = i;
            last_bi = i;
        }
    }
    if (first_bi < 0)
        throw std::runtime_error("locate_cut: no bistable point found on the scan range");

    auto bisect = [&](double g_in, double g_out, auto indicator) {
        // indicator() is true inside the bistable region
        double a = g_in, b = g_out;
        while (std::abs(b - a) > tol) {
            const double mid = 0.5 * (a + b);
            if (indicator(probe(mid)))
                a = mid;
            else
                b = mid;
        }
        return 0.5 * (a + b);
    };

    CutSpec cut;
    cut.g_minus = g_minus;
    // Below the bistable run: which phase sits there decides the orientation.
    double b_lo = g[std::max(first_bi - 1, 0)];
    double b_hi = g[std::min(last_bi + 1, n_scan - 1)];
    const auto below = st[std::max(first_bi - 1, 0)];
    const bool below_is_sr = below.second && !below.first;

    const double edge_lo =
        (first_bi == 0) ? g[0]
                        : bisect(g[first_bi], b_lo, [&](std::pair<bool, bool> s) {
                              return s.first && s.second;
                          });
    const double edge_hi =
        (last_bi == n_scan - 1) ? g[n_scan - 1]
                                : bisect(g[last_bi], b_hi, [&](std::pair<bool, bool> s) {
                                      return s.first && s.second;
                                  });
    if (below_is_sr) {
        cut.g_plus_sr = edge_lo;
        cut.g_plus_np = edge_hi;
    } else {
        cut.g_plus_sr = edge_hi;
        cut.g_plus_np = edge_lo;
    }
    return cut;
}

}  // namespace dicke
