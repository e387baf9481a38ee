#include "inertia_hd/continuous_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "inertia_hd/errors.hpp"

namespace inertia_hd {

namespace odeint = boost::numeric::odeint;

// ---------------------------------------------------------------------------
// schedules

void ContinuousSchedule::validate() const {
  if (!(t0 > 0.0)) throw InputError("continuous schedule: t0 must be positive");
  if (!(alpha >= 1.0)) throw InputError("continuous schedule: alpha must be at least 1");
  if (!beta || !b) throw InputError("continuous schedule: beta and b are required");
}

ContinuousSchedule ContinuousSchedule::case_one(double alpha, double beta, double t0) {
  ContinuousSchedule cs;
  cs.alpha = alpha;
  cs.t0 = t0;
  cs.beta = [beta](double) { return beta; };
  cs.beta_dot = [](double) { return 0.0; };
  cs.beta_ddot = [](double) { return 0.0; };
  cs.b = [](double) { return 1.0; };
  cs.b_dot = [](double) { return 0.0; };
  return cs;
}

ContinuousSchedule ContinuousSchedule::case_two(double alpha, double beta, double t0) {
  ContinuousSchedule cs = case_one(alpha, beta, t0);
  cs.b = [beta](double t) { return 1.0 + beta / t; };
  cs.b_dot = [beta](double t) { return -beta / (t * t); };
  return cs;
}

ContinuousSchedule ContinuousSchedule::case_three(double alpha, double r, double t0) {
  ContinuousSchedule cs;
  cs.alpha = alpha;
  cs.t0 = t0;
  cs.beta = [](double) { return 0.0; };
  cs.beta_dot = [](double) { return 0.0; };
  cs.beta_ddot = [](double) { return 0.0; };
  cs.b = [r](double t) { return std::pow(t, r); };
  cs.b_dot = [r](double t) { return r == 0.0 ? 0.0 : r * std::pow(t, r - 1.0); };
  return cs;
}

ContinuousSchedule ContinuousSchedule::case_four(double alpha, double c, double b_exp,
                                                 double beta_exp, double t0) {
  ContinuousSchedule cs;
  cs.alpha = alpha;
  cs.t0 = t0;
  cs.beta = [beta_exp](double t) { return std::pow(t, beta_exp); };
  cs.beta_dot = [beta_exp](double t) { return beta_exp * std::pow(t, beta_exp - 1.0); };
  cs.beta_ddot = [beta_exp](double t) {
    return beta_exp * (beta_exp - 1.0) * std::pow(t, beta_exp - 2.0);
  };
  cs.b = [c, b_exp](double t) { return c * std::pow(t, b_exp); };
  cs.b_dot = [c, b_exp](double t) { return c * b_exp * std::pow(t, b_exp - 1.0); };
  return cs;
}

namespace {

double beta_dot_at(const ContinuousSchedule& cs, double t) {
  if (cs.beta_dot) return cs.beta_dot(t);
  const double d = 1e-5 * t;
  return (cs.beta(t + d) - cs.beta(t - d)) / (2.0 * d);
}

double w_unchecked(const ContinuousSchedule& cs, double t) {
  return cs.b(t) - beta_dot_at(cs, t) - cs.beta(t) / t;
}

double w_dot_unchecked(const ContinuousSchedule& cs, double t) {
  if (cs.beta_dot && cs.beta_ddot && cs.b_dot) {
    return cs.b_dot(t) - cs.beta_ddot(t) - cs.beta_dot(t) / t + cs.beta(t) / (t * t);
  }
  const double d = 1e-4 * t;
  return (w_unchecked(cs, t + d) - w_unchecked(cs, t - d)) / (2.0 * d);
}

void require_in_domain(const ContinuousSchedule& cs, double t) {
  if (!(t >= cs.t0)) {
    throw InputError("time " + std::to_string(t) + " precedes t0 = " + std::to_string(cs.t0));
  }
}

}  // namespace

double w_eval(const ContinuousSchedule& cs, double t) {
  require_in_domain(cs, t);
  return w_unchecked(cs, t);
}

double w_dot_eval(const ContinuousSchedule& cs, double t) {
  require_in_domain(cs, t);
  return w_dot_unchecked(cs, t);
}

// ---------------------------------------------------------------------------
// right-hand sides

Vector hessian_vec_product(const Objective& obj, const Vector& x, const Vector& v, bool allow_fd) {
  if (obj.has_hessian_vec()) return obj.hessian_vec(x, v);
  if (!allow_fd) throw CapabilityError("objective has no Hessian-vector product");
  const double delta = 1e-5 * (1.0 + x.norm()) / (1.0 + v.norm());
  return (obj.gradient(x + delta * v) - obj.gradient(x - delta * v)) / (2.0 * delta);
}

Vector din_avd_acceleration(const Objective& obj, const ContinuousSchedule& cs,
                            const TrajectoryPoint& p, bool allow_fd_hessian) {
  require_in_domain(cs, p.t);
  if (p.x.size() != p.v.size()) throw InputError("position and velocity sizes differ");
  Vector acc = -(cs.alpha / p.t) * p.v - cs.b(p.t) * obj.gradient(p.x);
  const double beta = cs.beta(p.t);
  if (beta != 0.0) acc -= beta * hessian_vec_product(obj, p.x, p.v, allow_fd_hessian);
  return acc;
}

FirstOrderRhs din_avd_first_order_rhs(const Objective& obj, double alpha, double beta,
                                      const Vector& x, const Vector& y, double t) {
  if (!(beta > 0.0)) throw InputError("first-order reformulation needs constant beta > 0");
  if (!(t > 0.0)) throw InputError("first-order reformulation needs t > 0");
  const double cx = 1.0 / beta - alpha / t;
  FirstOrderRhs out;
  out.x_dot = -beta * obj.gradient(x) + cx * x - y / beta;
  out.y_dot = (cx + alpha * beta / (t * t)) * x - y / beta;
  return out;
}

Vector first_order_y_from_velocity(const Objective& obj, double alpha, double beta,
                                   const Vector& x, const Vector& v, double t) {
  if (!(beta > 0.0)) throw InputError("first-order reformulation needs constant beta > 0");
  return -beta * v - beta * beta * obj.gradient(x) + (1.0 - alpha * beta / t) * x;
}

// ---------------------------------------------------------------------------
// integration

namespace {

using State = std::vector<double>;

struct Sample {
  double t;
  State y;
};

template <class Rhs>
std::vector<Sample> integrate_system(Rhs rhs, State y0, double t0, double t_end, double tol,
                                     const IntegrateOptions& opts) {
  if (!(t_end > t0)) throw InputError("integration needs t_end > t0");
  if (!(tol > 0.0)) throw InputError("integration tolerance must be positive");

  std::vector<double> samples;
  if (opts.log_samples >= 2) {
    const double la = std::log(t0), lb = std::log(t_end);
    for (int i = 1; i + 1 < opts.log_samples; ++i) {
      samples.push_back(std::exp(la + (lb - la) * i / (opts.log_samples - 1)));
    }
  }
  for (double t : opts.extra_times) {
    if (t > t0 && t < t_end) samples.push_back(t);
  }
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

  auto system = [&rhs](const State& y, State& dy, double t) { rhs(y, dy, t); };
  auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(y0, t0, (t_end - t0) * 1e-4);

  std::vector<Sample> out;
  out.push_back({t0, y0});
  std::size_t next_sample = 0;
  State tmp(y0.size());
  try {
    while (stepper.current_time() < t_end) {
      const double t_now = stepper.current_time();
      if (t_now + stepper.current_time_step() > t_end) {
        // Land the last step on t_end exactly.
        stepper.initialize(stepper.current_state(), t_now, t_end - t_now);
      }
      const auto [t_prev, t_cur] = stepper.do_step(system);
      if (t_cur - t_prev < opts.min_step_fraction * std::abs(t_cur)) {
        throw NumericError("step size underflow at t = " + std::to_string(t_cur), t_cur);
      }
      for (double v : stepper.current_state()) {
        if (!std::isfinite(v)) {
          throw NumericError("non-finite state at t = " + std::to_string(t_cur), t_cur);
        }
      }
      while (next_sample < samples.size() && samples[next_sample] <= t_cur) {
        const double ts = samples[next_sample++];
        if (ts == t_cur) continue;
        stepper.calc_state(ts, tmp);
        out.push_back({ts, tmp});
      }
      const bool at_end = t_cur >= t_end;
      if (opts.include_steps || at_end) {
        out.push_back({at_end ? t_end : t_cur, stepper.current_state()});
      } else if (next_sample > 0 && samples[next_sample - 1] == t_cur) {
        out.push_back({t_cur, stepper.current_state()});
      }
    }
  } catch (const odeint::step_adjustment_error& e) {
    const double t = stepper.current_time();
    throw NumericError("integrator could not control the step at t = " + std::to_string(t) +
                           " (" + e.what() + ")",
                       t);
  } catch (const odeint::no_progress_error& e) {
    const double t = stepper.current_time();
    throw NumericError("integrator made no progress at t = " + std::to_string(t), t);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Sample& a, const Sample& b) { return a.t < b.t; });
  return out;
}

State concat(const Vector& a, const Vector& b) {
  State y(static_cast<std::size_t>(a.size() + b.size()));
  std::copy(a.data(), a.data() + a.size(), y.begin());
  std::copy(b.data(), b.data() + b.size(), y.begin() + a.size());
  return y;
}

}  // namespace

std::vector<TrajectoryPoint> integrate_trajectory(const Objective& obj,
                                                  const ContinuousSchedule& cs,
                                                  const Vector& x0, const Vector& v0,
                                                  double t_end, double tol,
                                                  const IntegrateOptions& opts) {
  cs.validate();
  if (x0.size() != v0.size()) throw InputError("x0 and v0 sizes differ");
  const Index n = x0.size();
  auto rhs = [&](const State& y, State& dy, double t) {
    TrajectoryPoint p{t, Eigen::Map<const Vector>(y.data(), n),
                      Eigen::Map<const Vector>(y.data() + n, n)};
    const Vector acc = din_avd_acceleration(obj, cs, p);
    std::copy(y.begin() + n, y.end(), dy.begin());
    std::copy(acc.data(), acc.data() + n, dy.begin() + n);
  };
  auto samples = integrate_system(rhs, concat(x0, v0), cs.t0, t_end, tol, opts);
  std::vector<TrajectoryPoint> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back({s.t, Eigen::Map<const Vector>(s.y.data(), n),
                   Eigen::Map<const Vector>(s.y.data() + n, n)});
  }
  return out;
}

std::vector<FirstOrderPoint> integrate_first_order(const Objective& obj, double alpha,
                                                   double beta, const Vector& x0,
                                                   const Vector& y0, double t0, double t_end,
                                                   double tol, const IntegrateOptions& opts) {
  if (!(t0 > 0.0)) throw InputError("t0 must be positive");
  if (x0.size() != y0.size()) throw InputError("x0 and y0 sizes differ");
  const Index n = x0.size();
  auto rhs = [&](const State& s, State& ds, double t) {
    const FirstOrderRhs r =
        din_avd_first_order_rhs(obj, alpha, beta, Eigen::Map<const Vector>(s.data(), n),
                                Eigen::Map<const Vector>(s.data() + n, n), t);
    std::copy(r.x_dot.data(), r.x_dot.data() + n, ds.begin());
    std::copy(r.y_dot.data(), r.y_dot.data() + n, ds.begin() + n);
  };
  auto samples = integrate_system(rhs, concat(x0, y0), t0, t_end, tol, opts);
  std::vector<FirstOrderPoint> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back({s.t, Eigen::Map<const Vector>(s.y.data(), n),
                   Eigen::Map<const Vector>(s.y.data() + n, n)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// conditions

ConditionTerms condition_terms(const ContinuousSchedule& cs, double t) {
  ConditionTerms c;
  c.w = w_unchecked(cs, t);
  c.w_dot = w_dot_unchecked(cs, t);
  c.c1 = c.w;
  c.c2 = (cs.alpha - 3.0) * c.w - t * c.w_dot;
  c.c4 = cs.beta(t) / (t * c.w);
  c.c5 = 1.0 / (t * t * c.w);
  return c;
}

ConditionReport check_continuous_conditions(const ContinuousSchedule& cs,
                                            std::optional<double> epsilon,
                                            std::span<const double> grid) {
  cs.validate();
  if (grid.empty()) throw InputError("condition grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < cs.t0) throw InputError("condition grid starts before t0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InputError("condition grid must be increasing");
  }
  if (epsilon && (!(*epsilon > 0.0) || !(*epsilon < cs.alpha - 1.0))) {
    throw InputError("epsilon must lie in (0, alpha - 1)");
  }

  const std::vector<double> g(grid.begin(), grid.end());
  std::vector<bool> c1(g.size()), c2(g.size()), c3(g.size());
  std::vector<double> ratio(g.size()), c4(g.size()), c5(g.size()), slack(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double t = g[i];
    const ConditionTerms ct = condition_terms(cs, t);
    slack[i] = 1e-12 * std::max({1.0, std::abs((cs.alpha - 3.0) * ct.w), std::abs(t * ct.w_dot)});
    const double c1_scale = std::abs(cs.b(t)) + std::abs(beta_dot_at(cs, t)) + std::abs(cs.beta(t) / t);
    c1[i] = ct.c1 > 1e-12 * c1_scale;
    c2[i] = ct.c2 >= -slack[i];
    ratio[i] = (ct.c2 + slack[i]) / cs.b(t);
    c4[i] = ct.c4;
    c5[i] = ct.c5;
  }

  ConditionReport report;
  report.grid = g;
  double eps_used = 0.0;
  if (epsilon) {
    eps_used = *epsilon;
  } else {
    const double best = *std::min_element(ratio.begin(), ratio.end());
    if (best > 0.0 && cs.alpha > 1.0) eps_used = std::min(best, (cs.alpha - 1.0) * (1.0 - 1e-9));
  }
  for (std::size_t i = 0; i < g.size(); ++i) c3[i] = eps_used > 0.0 && ratio[i] >= eps_used;
  report.epsilon_used = eps_used;

  report.verdicts.push_back(detail::scan_verdict("C1", g, c1));
  report.verdicts.back().note = "b > beta' + beta/t";
  report.verdicts.push_back(detail::scan_verdict("C2", g, c2));
  report.verdicts.back().note = "(alpha-3) w - t w' >= 0";
  report.verdicts.push_back(detail::scan_verdict("C3", g, c3));
  report.verdicts.back().note = epsilon ? "(alpha-3) w - t w' >= epsilon b"
                                        : "(alpha-3) w - t w' >= epsilon b, epsilon from grid";
  report.verdicts.push_back(detail::decay_verdict("C4", g, c4));
  report.verdicts.back().note = "beta/(t w) -> 0: " + report.verdicts.back().note;
  report.verdicts.push_back(detail::decay_verdict("C5", g, c5));
  report.verdicts.back().note = "1/(t^2 w) -> 0: " + report.verdicts.back().note;
  return report;
}

NamedCase named_case_from_string(std::string_view name) {
  if (name == "one" || name == "1") return NamedCase::one;
  if (name == "two" || name == "2") return NamedCase::two;
  if (name == "three" || name == "3") return NamedCase::three;
  if (name == "four" || name == "4") return NamedCase::four;
  throw InputError("unknown case '" + std::string(name) + "'");
}

CaseVerdict named_case_conditions(NamedCase which, const CaseParams& p) {
  CaseVerdict v;
  std::ostringstream region;
  switch (which) {
    case NamedCase::one: {
      v.holds = p.alpha > 3.0;
      if (v.holds) v.from_t = (p.alpha - 2.0) / (p.alpha - 3.0) * p.beta;
      region << "alpha > 3 and t > (alpha-2)/(alpha-3) beta";
      if (v.from_t) region << " = " << *v.from_t;
      break;
    }
    case NamedCase::two:
      v.holds = p.alpha > 3.0;
      region << "alpha > 3, all t (w = 1)";
      break;
    case NamedCase::three:
      v.holds = p.alpha >= 3.0 + p.r;
      region << "t b'(t) <= (alpha-3) b(t), i.e. alpha >= 3 + r = " << 3.0 + p.r;
      break;
    case NamedCase::four: {
      const double be = p.beta;
      if (p.b_exp == be - 1.0) {
        v.holds = be < p.c - 1.0 && be <= p.alpha - 2.0;
        region << "b = beta - 1: beta < c - 1 and beta <= alpha - 2";
      } else if (be >= -1.0 && be < p.alpha - 2.0 && p.b_exp > be - 1.0 &&
                 p.b_exp < p.alpha - 3.0) {
        v.holds = true;
        v.asymptotic = true;
        region << "-1 <= beta < alpha - 2 and beta - 1 < b < alpha - 3: holds for t large";
      } else {
        v.determined = false;
        region << "no closed-form region for these exponents";
      }
      break;
    }
  }
  v.region = region.str();
  return v;
}

std::vector<double> log_grid(double a, double b, int n) {
  if (!(a > 0.0) || !(b > a) || n < 2) throw InputError("log grid needs 0 < a < b and n >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / (n - 1));
  out.front() = a;
  out.back() = b;
  return out;
}

std::vector<double> linear_grid(double a, double b, int n) {
  if (!(b > a) || n < 2) throw InputError("linear grid needs a < b and n >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  out.back() = b;
  return out;
}

}  // namespace inertia_hd
