#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dicke/hops.hpp"
#include "dicke/meanfield.hpp"

namespace dicke {

enum class MetastablePhase { Normal, Superradiant };

// Reference points for the moving-average classifier: the normal state and
// the pair of superradiant mean-field fixed points (when present).
struct ClassifierReference {
    Eigen::Vector3d normal{0.0, 0.0, -0.5};
    std::vector<Eigen::Vector3d> superradiant;  // one or two points

    static ClassifierReference from_fixed_points(const std::vector<FixedPoint>& fps);
};

// Phase label per sample: moving average of <S>/N over `window_time`,
// assigned to the nearest reference point in m-space.
std::vector<MetastablePhase> classify_state(const TrajectoryRecord& record,
                                            const ClassifierReference& ref,
                                            double window_time);

struct OccupationCurves {
    std::vector<double> t;
    std::vector<double> p_s, p_n;    // fractions, p_s + p_n = 1
    std::vector<double> se;          // binomial standard error of either fraction
    int n_traj = 0;
    MetastablePhase initial_phase = MetastablePhase::Normal;
};

OccupationCurves occupation_curves(const std::vector<std::vector<MetastablePhase>>& labels,
                                   const std::vector<double>& t);

// Closed-form two-state solution with rates gamma_ns (normal -> one
// superradiant state) and gamma_sn (superradiant -> normal):
//   p_n(t) = gamma_sn/S + (2 gamma_ns p_n0 - gamma_sn p_s0)/S * exp(-S t),
//   S = 2 gamma_ns + gamma_sn.
std::pair<double, double> rate_solution(double gamma_ns, double gamma_sn, double p_n0,
                                        double p_s0, double t);

// Three-state rate system including the superradiant-superradiant rate:
//   p_n'  = -2 g_ns p_n + g_sn (p_s+ + p_s-)
//   p_s+' = -(g_sn + g_ss) p_s+ + g_ss p_s- + g_ns p_n
//   p_s-' = -(g_sn + g_ss) p_s- + g_ss p_s+ + g_ns p_n
std::vector<Eigen::Vector3d> rate_ode_full(double gamma_ns, double gamma_sn, double gamma_ss,
                                           const Eigen::Vector3d& p0,
                                           const std::vector<double>& t_grid);

enum class RateStatus { Ok, UpperBound };

struct RateFit {
    double gamma_ns = 0.0, gamma_sn = 0.0;
    double sigma_ns = 0.0, sigma_sn = 0.0;
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
    double residual_norm = 0.0;
    RateStatus status_ns = RateStatus::Ok;
    RateStatus status_sn = RateStatus::Ok;
};

// Joint weighted least squares of both analytic occupation curves against the
// measured pair (normal start and superradiant start) with Levenberg-Marquardt
// damping. Directions with zero observed events are reported as upper bounds
// gamma < -ln(1 - 1/n_traj)/T instead of fitted values.
RateFit fit_rates(const OccupationCurves& normal_start, const OccupationCurves& sr_start);

struct ExponentFit {
    double a_ns = 0.0, r_ns = 0.0, sigma_r_ns = 0.0;
    double a_sn = 0.0, r_sn = 0.0, sigma_r_sn = 0.0;
    int n_points_ns = 0, n_points_sn = 0;
};

// Weighted linear regression of ln(gamma) against N for gamma = A exp(r N).
ExponentFit fit_exponents(const std::vector<std::pair<int, RateFit>>& rates);

// Crossing r_ns(s) = r_sn(s) by linear interpolation between sampled cut
// positions; empty when the curves do not cross inside the sampled range.
std::optional<double> exponent_crossing(const std::vector<double>& s_values,
                                        const std::vector<ExponentFit>& fits);

// Cut through the bistable region at fixed g_minus: s = 0 on the boundary to
// the superradiant phase, s = 1 on the boundary to the normal phase, linear
// in g_plus in between.
struct CutSpec {
    double g_minus = 0.0;
    double g_plus_sr = 0.0;  // boundary to the superradiant phase (s = 0)
    double g_plus_np = 0.0;  // boundary to the normal phase (s = 1)

    double g_plus_at(double s) const { return g_plus_sr + s * (g_plus_np - g_plus_sr); }
    double s_of(double g_plus) const { return (g_plus - g_plus_sr) / (g_plus_np - g_plus_sr); }
};

// Locates the bistable window along g_plus at fixed g_minus by bisecting the
// stability transitions of the mean-field fixed points.
CutSpec locate_cut(const ModelParams& base, double g_minus, double g_plus_min,
                   double g_plus_max, double tol = 1e-4);

}  // namespace dicke
