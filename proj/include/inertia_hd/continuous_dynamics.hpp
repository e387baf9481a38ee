#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inertia_hd/condition_report.hpp"
#include "inertia_hd/linalg_problems.hpp"
#include "inertia_hd/types.hpp"

namespace inertia_hd {

/// Coefficients of  x'' + (alpha/t) x' + beta(t) H(x) x' + b(t) grad f(x) = 0
/// on [t0, inf). A missing beta_dot is replaced by central differences of
/// beta, and missing second derivatives by central differences of w with step
/// 1e-4 t.
struct ContinuousSchedule {
  double alpha = 3.0;
  double t0 = 1.0;
  std::function<double(double)> beta;
  std::function<double(double)> beta_dot;
  std::function<double(double)> beta_ddot;
  std::function<double(double)> b;
  std::function<double(double)> b_dot;

  void validate() const;

  /// beta constant, b = 1.
  static ContinuousSchedule case_one(double alpha, double beta, double t0 = 1.0);
  /// beta constant, b = 1 + beta/t.
  static ContinuousSchedule case_two(double alpha, double beta, double t0 = 1.0);
  /// beta = 0, b = t^r.
  static ContinuousSchedule case_three(double alpha, double r, double t0 = 1.0);
  /// b = c t^b_exp, beta = t^beta_exp.
  static ContinuousSchedule case_four(double alpha, double c, double b_exp, double beta_exp,
                                      double t0 = 1.0);
};

/// w(t) = b(t) - beta'(t) - beta(t)/t
double w_eval(const ContinuousSchedule& cs, double t);
double w_dot_eval(const ContinuousSchedule& cs, double t);

struct TrajectoryPoint {
  double t = 0.0;
  Vector x;
  Vector v;
};

/// H(x) v, analytic when the objective provides it. Otherwise central
/// differences of the gradient with delta = 1e-5 (1 + |x|)/(1 + |v|), unless
/// `allow_fd` is false (CapabilityError).
Vector hessian_vec_product(const Objective& obj, const Vector& x, const Vector& v,
                           bool allow_fd = true);

/// x'' = -(alpha/t) v - beta(t) H(x) v - b(t) grad f(x)
Vector din_avd_acceleration(const Objective& obj, const ContinuousSchedule& cs,
                            const TrajectoryPoint& p, bool allow_fd_hessian = true);

struct FirstOrderRhs {
  Vector x_dot;
  Vector y_dot;
};

/// Hessian-free form for constant beta > 0 and b = 1:
///   x' = -beta grad f(x) + (1/beta - alpha/t) x - y/beta
///   y' = (1/beta - alpha/t + alpha beta/t^2) x - y/beta
FirstOrderRhs din_avd_first_order_rhs(const Objective& obj, double alpha, double beta,
                                      const Vector& x, const Vector& y, double t);

/// y such that the first-order system starts with velocity v at (x, t).
Vector first_order_y_from_velocity(const Objective& obj, double alpha, double beta,
                                   const Vector& x, const Vector& v, double t);

struct IntegrateOptions {
  /// Log-spaced samples on [t0, t_end], endpoints included.
  int log_samples = 200;
  /// Additional sample times inside [t0, t_end].
  std::vector<double> extra_times;
  /// Also emit every accepted integrator step.
  bool include_steps = true;
  /// Steps below this fraction of t abort with NumericError.
  double min_step_fraction = 1e-13;
};

/// Adaptive Dormand-Prince 5(4) integration of (x, v) from (x0, v0) at
/// cs.t0 to t_end with absolute and relative tolerance `tol`. The result is
/// sorted by time, starts at t0 and ends at t_end.
std::vector<TrajectoryPoint> integrate_trajectory(const Objective& obj,
                                                  const ContinuousSchedule& cs,
                                                  const Vector& x0, const Vector& v0,
                                                  double t_end, double tol,
                                                  const IntegrateOptions& opts = {});

struct FirstOrderPoint {
  double t = 0.0;
  Vector x;
  Vector y;
};

/// Same integrator on the first-order system (constant beta, b = 1).
std::vector<FirstOrderPoint> integrate_first_order(const Objective& obj, double alpha,
                                                   double beta, const Vector& x0,
                                                   const Vector& y0, double t0, double t_end,
                                                   double tol,
                                                   const IntegrateOptions& opts = {});

/// Pointwise quantities behind (C1)-(C5).
struct ConditionTerms {
  double w = 0.0;
  double w_dot = 0.0;
  /// b - beta' - beta/t, must be > 0
  double c1 = 0.0;
  /// (alpha - 3) w - t w', must be >= 0 (>= epsilon b for C3)
  double c2 = 0.0;
  /// beta / (t w)
  double c4 = 0.0;
  /// 1 / (t^2 w)
  double c5 = 0.0;
};

ConditionTerms condition_terms(const ContinuousSchedule& cs, double t);

/// (C1)-(C5) on the grid. When `epsilon` is empty, C3 uses the largest
/// epsilon the grid admits (capped below alpha - 1) and reports it as
/// epsilon_used. C4/C5 are limits: they are reported as holding
/// asymptotically when the ratio decays monotonically over the final decade
/// of the grid.
ConditionReport check_continuous_conditions(const ContinuousSchedule& cs,
                                            std::optional<double> epsilon,
                                            std::span<const double> grid);

enum class NamedCase { one, two, three, four };

NamedCase named_case_from_string(std::string_view name);

struct CaseParams {
  double alpha = 3.0;
  double beta = 0.0;      // cases one, two; exponent for case four
  double r = 0.0;         // case three
  double c = 1.0;         // case four
  double b_exp = 0.0;     // case four
};

struct CaseVerdict {
  bool determined = true;
  bool holds = false;
  /// Conditions hold for t above this threshold (case one).
  std::optional<double> from_t;
  /// Conditions hold only for t large enough (case four, general exponents).
  bool asymptotic = false;
  std::string region;
};

/// Closed-form regions where (C1)-(C2) hold for the standard parameter
/// families.
CaseVerdict named_case_conditions(NamedCase which, const CaseParams& p);

std::vector<double> log_grid(double a, double b, int n);
std::vector<double> linear_grid(double a, double b, int n);

}  // namespace inertia_hd
