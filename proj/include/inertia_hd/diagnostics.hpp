#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "inertia_hd/continuous_dynamics.hpp"
#include "inertia_hd/inertial_algorithms.hpp"
#include "inertia_hd/linalg_problems.hpp"

namespace inertia_hd {

/// Squared norm used by an energy; empty means Euclidean.
using SqNorm = std::function<double(const Vector&)>;

struct LyapunovSpec {
  /// 0 < lambda <= alpha - 1
  double lambda = 1.0;
  Reference reference;
};

/// E(t) = delta(t)(f(x) - f*) + 1/2 |v_lambda|^2 + c/2 |x - x*|^2 with
/// v_lambda = lambda (x - x*) + t (x' + beta(t) grad f(x)),
/// delta(t) = t^2 w(t) - (lambda + 1 - alpha) t beta(t), c = lambda (alpha - 1 - lambda).
double lyapunov_continuous(const Objective& obj, const ContinuousSchedule& cs,
                           const LyapunovSpec& spec, const TrajectoryPoint& p);

/// E_k(lambda) = delta_k (f(x_k) - f*) + 1/2 |v_k|^2 + c/2 |x_k - x*|^2 with
/// v_k = lambda (x_k - x*) + k (x_k - x_{k-1} + beta_k h grad f(x_k)).
double lyapunov_ipahd(const Objective& obj, const DiscreteSchedule& sched,
                      const LyapunovSpec& spec, const RunState& st);

/// E_k = t_k^2 (f(x_k) - f*) + |v_k|^2 / (2s) with t_k = (k - 1)/(alpha - 1) and
/// v_k = (x_{k-1} - x*) + t_k (x_k - x_{k-1} + beta sqrt(s) g_{k-1}), where
/// g_{k-1} is st.grad_prev.
double lyapunov_igahd(const Objective& obj, const IGAHDParams& p, const Reference& ref,
                      const RunState& st, const SqNorm& sq_norm = {});

/// Right side minus left side of the reinforced descent inequality
///   f(y - s grad f(y)) <= f(x) + <grad f(y), y - x> - s/2 |grad f(y)|^2
///                         - s/2 |grad f(x) - grad f(y)|^2.
/// Non-negative whenever s L <= 1.
double descent_lemma_slack(const Objective& obj, const Vector& x, const Vector& y, double s);

enum class TraceField { f_gap, grad_norm, velocity_norm, lyapunov, y_grad_norm };

std::string_view to_string(TraceField f);
TraceField trace_field_from_string(std::string_view name);

/// Values of `field` in record order; NaN where an optional is missing.
std::vector<double> field_values(const RunTrace& trace, TraceField field);
std::vector<double> trace_ks(const RunTrace& trace);

/// Values of f_gap below this are excluded from log-log fits.
inline constexpr double kGapFloor = 1e-14;

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double k_lo = 0.0;
  double k_hi = 0.0;
  /// Root-mean-square residual of the log-log fit.
  double residual = 0.0;
  int points = 0;
};

/// Least-squares fit of log(value) against log(k). Throws InputError on
/// non-positive values, fewer than two points, or k_hi <= 2 k_lo.
RateFit fit_power_law(std::span<const double> ks, std::span<const double> values);

/// fit_power_law over records with k in [k_lo, k_hi]. For f_gap, values below
/// kGapFloor are dropped and the range shrinks to the retained points.
RateFit fit_rate_slope(const RunTrace& trace, TraceField field, double k_lo, double k_hi);

struct SummabilityResult {
  double total = 0.0;
  /// Share of the total contributed by k in [K/10, K], K the last index.
  double tail_fraction = 0.0;
};

SummabilityResult summability_probe(std::span<const double> ks, std::span<const double> terms);

/// Terms weight(k) * field^power.
SummabilityResult summability_probe(const RunTrace& trace, const std::function<double(double)>& weight,
                                    TraceField field, double power = 1.0);

/// Number of interior indices where the successive differences change sign.
/// Differences with magnitude <= 1e-14 are treated as flat and skipped.
int count_oscillations(std::span<const double> values);
int count_oscillations(const RunTrace& trace, TraceField field);

/// max of values over k in [K/10, K] divided by max over [K/100, K/10].
double final_to_middle_decade_ratio(std::span<const double> ks, std::span<const double> values);

/// True when max over k > k_burn does not exceed max over k <= k_burn.
bool running_max_settles(std::span<const double> ks, std::span<const double> values,
                         double k_burn);

/// Largest relative increase max_k (E_{k+1} - E_k) / (1 + |E_k|) over a sequence.
double max_relative_increase(std::span<const double> energies);

}  // namespace inertia_hd
