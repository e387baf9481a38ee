#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inertia_hd/condition_report.hpp"
#include "inertia_hd/linalg_problems.hpp"
#include "inertia_hd/prox_calculus.hpp"
#include "inertia_hd/types.hpp"

namespace inertia_hd {

/// Damping parameters of the implicit discretization: viscous coefficient
/// alpha/(kh), Hessian coefficient beta_k and time scaling b_k, step h.
struct DiscreteSchedule {
  double alpha = 3.0;
  double h = 1.0;
  std::function<double(int)> beta_k;
  std::function<double(int)> b_k;

  void validate() const;

  static DiscreteSchedule constant(double alpha, double h, double beta, double b = 1.0);
};

struct GrowthQuantities {
  double gamma = 0.0;
  double B = 0.0;
  double delta = 0.0;
};

/// B_k = k(h b_k + beta_k - beta_{k+1}) - beta_{k+1}
/// delta_k = h((k + 1 + gamma) B_k + gamma (k + 1) beta_{k+1}),  gamma = alpha - lambda - 1.
GrowthQuantities compute_growth(const DiscreteSchedule& sched, double lambda, int k);

/// Scans k in [k_first, k_max] for (G1) B_k > 0, (G2) delta_{k+1} - delta_k
/// - h lambda B_k <= 0, (G1+) B_k >= B_lower, (G2+) the same with
/// -epsilon h B_k on the right, and (G3) beta_{k+1}/B_k -> 0.
ConditionReport validate_discrete_conditions(const DiscreteSchedule& sched, double lambda,
                                             int k_max, double epsilon, double B_lower,
                                             int k_first = 1);

struct IGAHDParams {
  double alpha = 3.0;
  double beta = 0.0;
  double s = 1.0;

  /// alpha >= 3, 0 <= beta < 2 sqrt(s), s L <= 1 (when L is known).
  void validate(std::optional<double> lipschitz_L) const;
};

/// Iterate pair (x_{k-1}, x_k). `grad_prev` caches the gradient-like quantity
/// the method reuses at x_{k-1}: grad f, grad f_theta or z_{k-1} = grad f_M.
struct RunState {
  int k = 1;
  Vector x_prev;
  Vector x_curr;
  Vector grad_prev;
};

/// Zero-velocity start x_{k-1} = x_k = x at iteration k.
RunState warm_start(int k, const Vector& x, Vector grad_at_x);

struct GradientStep {
  RunState next;
  Vector y;
  Vector grad_y;
  /// Gradient (or surrogate) at x_k, as used by the step.
  Vector grad_x;
};

/// y_k = x_k + a_k (x_k - x_{k-1}) + h a_k beta_k grad f(x_k),  a_k = k/(k+alpha)
/// x_{k+1} = prox_{lambda_k f}(y_k),  lambda_k = h k (beta_k + h b_k)/(k+alpha)
RunState ipahd_step(const Objective& obj, const DiscreteSchedule& sched, const RunState& st);

/// The IPAHD step on the Moreau envelope f_theta, written with prox of f only.
RunState ipahd_ns_step(const ProxOracle& f_prox, const DiscreteSchedule& sched, double theta,
                       const RunState& st);

/// mu_k = theta (k + alpha) / (theta (k + alpha) + h k (beta_k + h b_k))
double ipahd_ns_mu(const DiscreteSchedule& sched, double theta, int k);

/// y_k = x_k + (1 - alpha/k)(x_k - x_{k-1}) - beta sqrt(s)(g_k - g_{k-1}) - (beta sqrt(s)/k) g_{k-1}
/// x_{k+1} = y_k - s grad f(y_k)
GradientStep igahd_step(const Objective& obj, const IGAHDParams& p, const RunState& st);

/// Nesterov-style step y_k = x_k + (1 - alpha/k)(x_k - x_{k-1}),
/// x_{k+1} = y_k - s grad f(y_k). `p.beta` is ignored.
GradientStep fista_step(const Objective& obj, const IGAHDParams& p, const RunState& st);

/// Which z enters the (beta sqrt(s)/k) correction of IGAHD-RLS.
enum class RlsCorrection { current, lagged };

/// z_k = x_k - prox^M_f(x_k)
/// y_k = x_k + (1 - alpha/k)(x_k - x_{k-1}) - beta sqrt(s)(z_k - z_{k-1}) - (beta sqrt(s)/k) z_k
/// x_{k+1} = (1 - s) y_k + s prox^M_f(y_k)
/// With RlsCorrection::lagged the last term uses z_{k-1}.
GradientStep igahd_rls_step(const MetricRLS& mr, const IGAHDParams& p, const RunState& st,
                            RlsCorrection correction = RlsCorrection::current);

struct TraceRecord {
  int k = 0;
  double f_gap = 0.0;
  double grad_norm = 0.0;
  double velocity_norm = 0.0;
  std::optional<double> lyapunov;
  std::optional<double> y_grad_norm;
  /// |x_k - x*|, kept in memory for plotting; not part of the CSV schema.
  std::optional<double> distance;
};

/// One record per iteration, describing x_k, x_{k-1} and (for gradient
/// methods) y_k.
struct RunTrace {
  std::vector<TraceRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }

  /// k,f_gap,grad_norm,velocity_norm,lyapunov,y_grad_norm with %.17g values
  /// and empty fields for missing optionals.
  std::string to_csv() const;
  static RunTrace from_csv(std::string_view text);
};

enum class Method { ipahd, ipahd_ns, igahd, igahd_rls, fista };

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);

struct StoppingRule {
  std::optional<double> gap_tol;
  std::optional<double> grad_tol;
  std::optional<double> velocity_tol;
};

/// Objective for the smooth and proximal methods, or an RLS instance with its
/// metric for igahd_rls (and fista, which then runs on f_M).
struct Problem {
  Objective objective;
  std::optional<MetricRLS> metric;

  static Problem from_objective(Objective obj);
  static Problem from_rls(MetricRLS mr);
};

struct SolverSettings {
  IGAHDParams igahd;
  std::optional<DiscreteSchedule> schedule;
  double theta = 1.0;
  RlsCorrection rls_correction = RlsCorrection::current;
};

struct RunOptions {
  int max_iter = 1000;
  StoppingRule stop;
  /// x_1; x_0 = x_1. Defaults to zero.
  std::optional<Vector> x1;
  /// First iteration index; see default_k_start.
  std::optional<int> k_start;
  /// Needed for gaps, distances and Lyapunov values. Falls back to the
  /// objective's known minimizer.
  std::optional<Reference> reference;
  /// lambda of the IPAHD energy; defaults to alpha - 1.
  std::optional<double> lyapunov_lambda;
  /// Called with the state at the start of every iteration and once more with
  /// the final state.
  std::function<void(const RunState&)> observer;
};

struct RunResult {
  RunTrace trace;
  RunState final_state;
  std::string stop_reason;
};

/// ceil(alpha) + 1 for the gradient methods, where 1 - alpha/k < 0 below;
/// 1 for the proximal methods.
int default_k_start(Method m, double alpha);

/// Raises the error run_solver would raise for these parameters, without
/// iterating.
void validate_method(Method method, const Problem& problem, const SolverSettings& settings);

/// Validates the method's parameters, then iterates and records a trace row
/// per iteration. Stops on max_iter or any tolerance in `opts.stop`.
RunResult run_solver(Method method, const Problem& problem, const SolverSettings& settings,
                     const RunOptions& opts);

/// High-accuracy reference for an RLS instance: FISTA on f_M for `budget`
/// iterations. x* is the final prox^M_f point and f* = f(x*).
Reference presolve_reference(const MetricRLS& mr, int budget);

}  // namespace inertia_hd
