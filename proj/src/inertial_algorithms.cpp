#include "inertia_hd/inertial_algorithms.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "inertia_hd/diagnostics.hpp"
#include "inertia_hd/errors.hpp"

namespace inertia_hd {

// ---------------------------------------------------------------------------
// schedules and growth conditions

void DiscreteSchedule::validate() const {
  if (!(alpha > 1.0)) throw InputError("discrete schedule: alpha must exceed 1");
  if (!(h > 0.0)) throw InputError("discrete schedule: step h must be positive");
  if (!beta_k || !b_k) throw InputError("discrete schedule: beta_k and b_k must be set");
  if (!(beta_k(1) >= 0.0)) throw InputError("discrete schedule: beta_k must be non-negative");
  if (!(b_k(1) > 0.0)) throw InputError("discrete schedule: b_k must be positive");
}

DiscreteSchedule DiscreteSchedule::constant(double alpha, double h, double beta, double b) {
  DiscreteSchedule s;
  s.alpha = alpha;
  s.h = h;
  s.beta_k = [beta](int) { return beta; };
  s.b_k = [b](int) { return b; };
  s.validate();
  return s;
}

GrowthQuantities compute_growth(const DiscreteSchedule& sched, double lambda, int k) {
  sched.validate();
  if (!(lambda > 0.0) || lambda > sched.alpha - 1.0) {
    throw InputError("growth quantities: lambda must lie in (0, alpha - 1]");
  }
  if (k < 1) throw InputError("growth quantities: k must be at least 1");
  const double kk = k;
  const double beta_next = sched.beta_k(k + 1);
  GrowthQuantities g;
  g.gamma = sched.alpha - lambda - 1.0;
  g.B = kk * (sched.h * sched.b_k(k) + sched.beta_k(k) - beta_next) - beta_next;
  g.delta = sched.h * ((kk + 1.0 + g.gamma) * g.B + g.gamma * (kk + 1.0) * beta_next);
  return g;
}

ConditionReport validate_discrete_conditions(const DiscreteSchedule& sched, double lambda,
                                             int k_max, double epsilon, double B_lower,
                                             int k_first) {
  if (k_max < 2) throw InputError("condition scan: k_max must be at least 2");
  if (k_first < 1 || k_first >= k_max) throw InputError("condition scan: need 1 <= k_first < k_max");
  if (!(epsilon > 0.0)) throw InputError("condition scan: epsilon must be positive");
  if (!(B_lower > 0.0)) throw InputError("condition scan: B lower bound must be positive");

  const double h = sched.h;
  std::vector<double> grid;
  std::vector<bool> g1, g2, g1p, g2p;
  std::vector<double> g3;
  GrowthQuantities cur = compute_growth(sched, lambda, k_first);
  for (int k = k_first; k <= k_max; ++k) {
    const GrowthQuantities next = compute_growth(sched, lambda, k + 1);
    const double lhs = next.delta - cur.delta - h * lambda * cur.B;
    const double slack = 1e-12 * std::max({1.0, std::abs(next.delta), std::abs(cur.delta)});
    grid.push_back(k);
    const double b_scale = k * (h * sched.b_k(k) + sched.beta_k(k) + sched.beta_k(k + 1)) +
                           sched.beta_k(k + 1);
    g1.push_back(cur.B > 1e-12 * b_scale);
    g2.push_back(lhs <= slack);
    g1p.push_back(cur.B >= B_lower);
    g2p.push_back(lhs <= -epsilon * h * cur.B + slack);
    const double ratio = cur.B > 0.0 ? sched.beta_k(k + 1) / cur.B
                                     : std::numeric_limits<double>::infinity();
    g3.push_back(ratio);
    cur = next;
  }

  ConditionReport report;
  report.epsilon_used = epsilon;
  report.grid = grid;
  report.verdicts.push_back(detail::scan_verdict("G1", grid, g1));
  report.verdicts.push_back(detail::scan_verdict("G2", grid, g2));
  report.verdicts.push_back(detail::scan_verdict("G1+", grid, g1p));
  report.verdicts.push_back(detail::scan_verdict("G2+", grid, g2p));
  report.verdicts.push_back(detail::decay_verdict("G3", grid, g3));
  report.verdicts[0].note = "B_k > 0";
  report.verdicts[1].note = "delta_{k+1} - delta_k - h lambda B_k <= 0";
  report.verdicts[2].note = "B_k >= " + std::to_string(B_lower);
  report.verdicts[3].note = "... <= -epsilon h B_k";
  report.verdicts[4].note = "beta_{k+1}/B_k -> 0: " + report.verdicts[4].note;
  return report;
}

void IGAHDParams::validate(std::optional<double> lipschitz_L) const {
  if (!(alpha >= 3.0)) throw InputError("IGAHD requires alpha ≥ 3");
  if (!(s > 0.0)) throw InputError("IGAHD requires s > 0");
  if (!(beta >= 0.0) || !(beta < 2.0 * std::sqrt(s))) {
    throw InputError("IGAHD requires 0 ≤ beta < 2 sqrt(s)");
  }
  if (lipschitz_L && !(s * *lipschitz_L <= 1.0)) {
    throw InputError("IGAHD requires sL ≤ 1 (s = " + std::to_string(s) +
                     ", L = " + std::to_string(*lipschitz_L) + ")");
  }
}

// ---------------------------------------------------------------------------
// single steps

RunState warm_start(int k, const Vector& x, Vector grad_at_x) {
  return RunState{k, x, x, std::move(grad_at_x)};
}

RunState ipahd_step(const Objective& obj, const DiscreteSchedule& sched, const RunState& st) {
  if (!obj.has_prox()) throw CapabilityError("IPAHD needs a prox oracle");
  const double k = st.k;
  const double beta = sched.beta_k(st.k);
  const double b = sched.b_k(st.k);
  const double h = sched.h;
  const double a = k / (k + sched.alpha);
  const double step = h * k * (beta + h * b) / (k + sched.alpha);
  const Vector g = obj.gradient(st.x_curr);
  const Vector y = st.x_curr + a * (st.x_curr - st.x_prev) + (h * a * beta) * g;
  return RunState{st.k + 1, st.x_curr, obj.prox(y, step), g};
}

double ipahd_ns_mu(const DiscreteSchedule& sched, double theta, int k) {
  const double kk = k;
  const double num = theta * (kk + sched.alpha);
  return num / (num + sched.h * kk * (sched.beta_k(k) + sched.h * sched.b_k(k)));
}

RunState ipahd_ns_step(const ProxOracle& f_prox, const DiscreteSchedule& sched, double theta,
                       const RunState& st) {
  if (!(theta > 0.0)) throw InputError("IPAHD-NS requires theta > 0");
  if (!f_prox) throw CapabilityError("IPAHD-NS needs a prox oracle");
  const double k = st.k;
  const double beta = sched.beta_k(st.k);
  const double a = k / (k + sched.alpha);
  const Vector g_env = moreau_gradient(f_prox, st.x_curr, theta);
  const Vector y = st.x_curr + a * (st.x_curr - st.x_prev) + (sched.h * a * beta) * g_env;
  const double mu = ipahd_ns_mu(sched, theta, st.k);
  Vector x_next = mu * y + (1.0 - mu) * f_prox(y, theta / mu);
  return RunState{st.k + 1, st.x_curr, std::move(x_next), g_env};
}

GradientStep igahd_step(const Objective& obj, const IGAHDParams& p, const RunState& st) {
  const double k = st.k;
  const double a = 1.0 - p.alpha / k;
  const double bs = p.beta * std::sqrt(p.s);
  const Vector& x = st.x_curr;
  const Vector& gp = st.grad_prev;
  Vector g = obj.gradient(x);
  Vector y = x + a * (x - st.x_prev) - bs * (g - gp) - (bs / k) * gp;
  Vector gy = obj.gradient(y);
  Vector x_next = y - p.s * gy;
  GradientStep out;
  out.next = RunState{st.k + 1, x, std::move(x_next), g};
  out.y = std::move(y);
  out.grad_y = std::move(gy);
  out.grad_x = std::move(g);
  return out;
}

GradientStep fista_step(const Objective& obj, const IGAHDParams& p, const RunState& st) {
  return igahd_step(obj, IGAHDParams{p.alpha, 0.0, p.s}, st);
}

GradientStep igahd_rls_step(const MetricRLS& mr, const IGAHDParams& p, const RunState& st,
                            RlsCorrection correction) {
  const double k = st.k;
  const double a = 1.0 - p.alpha / k;
  const double bs = p.beta * std::sqrt(p.s);
  const Vector& x = st.x_curr;
  const Vector& zp = st.grad_prev;
  Vector z = x - prox_metric_rls(mr, x);
  const Vector& z_corr = correction == RlsCorrection::current ? z : zp;
  Vector y = x + a * (x - st.x_prev) - bs * (z - zp) - (bs / k) * z_corr;
  const Vector py = prox_metric_rls(mr, y);
  GradientStep out;
  out.grad_y = y - py;
  out.next = RunState{st.k + 1, x, (1.0 - p.s) * y + p.s * py, z};
  out.y = std::move(y);
  out.grad_x = std::move(z);
  return out;
}

// ---------------------------------------------------------------------------
// traces

namespace {

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

double parse_double(std::string_view s) {
  // strtod rather than from_chars: libstdc++ 11 lacks the floating overloads.
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) throw InputError("trace CSV: bad number '" + tmp + "'");
  return v;
}

}  // namespace

std::string RunTrace::to_csv() const {
  std::string out = "k,f_gap,grad_norm,velocity_norm,lyapunov,y_grad_norm\n";
  for (const auto& r : records) {
    out += std::to_string(r.k);
    out += ',';
    append_number(out, r.f_gap);
    out += ',';
    append_number(out, r.grad_norm);
    out += ',';
    append_number(out, r.velocity_norm);
    out += ',';
    if (r.lyapunov) append_number(out, *r.lyapunov);
    out += ',';
    if (r.y_grad_norm) append_number(out, *r.y_grad_norm);
    out += '\n';
  }
  return out;
}

RunTrace RunTrace::from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "k,f_gap,grad_norm,velocity_norm,lyapunov,y_grad_norm") {
    throw InputError("trace CSV: unexpected header");
  }
  RunTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto pos = rest.find(',');
      fields.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (fields.size() != 6) throw InputError("trace CSV: expected 6 fields");
    TraceRecord r;
    r.k = static_cast<int>(parse_double(fields[0]));
    r.f_gap = parse_double(fields[1]);
    r.grad_norm = parse_double(fields[2]);
    r.velocity_norm = parse_double(fields[3]);
    if (!fields[4].empty()) r.lyapunov = parse_double(fields[4]);
    if (!fields[5].empty()) r.y_grad_norm = parse_double(fields[5]);
    trace.records.push_back(r);
  }
  return trace;
}

// ---------------------------------------------------------------------------
// driver

std::string_view to_string(Method m) {
  switch (m) {
    case Method::ipahd: return "ipahd";
    case Method::ipahd_ns: return "ipahd_ns";
    case Method::igahd: return "igahd";
    case Method::igahd_rls: return "igahd_rls";
    case Method::fista: return "fista";
  }
  return "igahd";
}

Method method_from_string(std::string_view name) {
  if (name == "ipahd") return Method::ipahd;
  if (name == "ipahd_ns") return Method::ipahd_ns;
  if (name == "igahd") return Method::igahd;
  if (name == "igahd_rls") return Method::igahd_rls;
  if (name == "fista") return Method::fista;
  throw InputError("unknown method '" + std::string(name) + "'");
}

Problem Problem::from_objective(Objective obj) { return Problem{std::move(obj), std::nullopt}; }

Problem Problem::from_rls(MetricRLS mr) {
  Objective env = make_metric_envelope(mr);
  return Problem{std::move(env), std::move(mr)};
}

int default_k_start(Method m, double alpha) {
  switch (m) {
    case Method::igahd:
    case Method::igahd_rls:
    case Method::fista: return static_cast<int>(std::ceil(alpha)) + 1;
    case Method::ipahd:
    case Method::ipahd_ns: return 1;
  }
  return 1;
}

namespace {

enum class Route { smooth_gradient, rls_gradient, proximal, proximal_ns };

struct Plan {
  Route route;
  IGAHDParams params;
  bool drop_beta = false;
};

Plan make_plan(Method method, const Problem& problem, const SolverSettings& settings) {
  Plan plan{Route::smooth_gradient, settings.igahd, false};
  switch (method) {
    case Method::fista:
      plan.drop_beta = true;
      plan.params.beta = 0.0;
      [[fallthrough]];
    case Method::igahd:
      if (problem.metric) {
        plan.route = Route::rls_gradient;
        plan.params.validate(1.0);
      } else {
        if (!problem.objective.gradient) throw InputError("gradient method needs a gradient oracle");
        plan.route = Route::smooth_gradient;
        plan.params.validate(problem.objective.lipschitz_L);
      }
      break;
    case Method::igahd_rls:
      if (!problem.metric) throw InputError("igahd_rls needs a regularized least-squares problem");
      plan.route = Route::rls_gradient;
      plan.params.validate(1.0);
      break;
    case Method::ipahd:
      if (!settings.schedule) throw InputError("ipahd needs a discrete schedule");
      settings.schedule->validate();
      if (!problem.objective.has_prox()) throw CapabilityError("ipahd needs a prox oracle");
      plan.route = Route::proximal;
      break;
    case Method::ipahd_ns:
      if (!settings.schedule) throw InputError("ipahd_ns needs a discrete schedule");
      settings.schedule->validate();
      if (!(settings.theta > 0.0)) throw InputError("ipahd_ns requires theta > 0");
      if (!problem.objective.has_prox()) throw CapabilityError("ipahd_ns needs a prox oracle");
      plan.route = Route::proximal_ns;
      break;
  }
  return plan;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

RunResult run_impl(Method method, const Problem& problem, const SolverSettings& settings,
                   const RunOptions& opts, const Plan& plan, const std::optional<Reference>& ref) {
  const Objective& obj = problem.objective;
  const Index n = problem.metric ? problem.metric->dimension() : obj.dimension;
  const Vector x1 = opts.x1.value_or(Vector::Zero(n));
  if (x1.size() != n) throw InputError("initial point has the wrong dimension");

  const double alpha = plan.route == Route::proximal || plan.route == Route::proximal_ns
                           ? settings.schedule->alpha
                           : plan.params.alpha;
  const int k_start = opts.k_start.value_or(default_k_start(method, alpha));
  if (k_start < 1) throw InputError("k_start must be at least 1");

  std::optional<Objective> envelope;
  if (plan.route == Route::proximal_ns) envelope = make_moreau_envelope(obj, settings.theta);

  // grad_prev at the warm start
  Vector g1;
  switch (plan.route) {
    case Route::smooth_gradient:
    case Route::proximal: g1 = obj.gradient(x1); break;
    case Route::rls_gradient: g1 = grad_metric_rls(*problem.metric, x1); break;
    case Route::proximal_ns: g1 = moreau_gradient(obj.prox, x1, settings.theta); break;
  }
  RunState st = warm_start(k_start, x1, std::move(g1));

  SqNorm metric_norm;
  if (plan.route == Route::rls_gradient) {
    const MetricRLS* mr = &*problem.metric;
    metric_norm = [mr](const Vector& v) { return mr->metric_sq_norm(v); };
  }
  const double lyap_lambda = opts.lyapunov_lambda.value_or(alpha - 1.0);

  RunResult result;
  result.stop_reason = "max_iter";
  result.trace.records.reserve(static_cast<std::size_t>(std::max(opts.max_iter, 0)));

  for (int it = 0; it < opts.max_iter; ++it) {
    if (opts.observer) opts.observer(st);

    TraceRecord rec;
    rec.k = st.k;
    rec.velocity_norm = (st.x_curr - st.x_prev).norm();

    RunState next;
    switch (plan.route) {
      case Route::smooth_gradient: {
        GradientStep gs = igahd_step(obj, plan.params, st);
        rec.grad_norm = gs.grad_x.norm();
        rec.y_grad_norm = gs.grad_y.norm();
        if (ref) {
          rec.f_gap = objective_gap(obj, st.x_curr, *ref);
          rec.lyapunov = lyapunov_igahd(obj, plan.params, *ref, st);
        }
        next = std::move(gs.next);
        break;
      }
      case Route::rls_gradient: {
        GradientStep gs = igahd_rls_step(*problem.metric, plan.params, st, settings.rls_correction);
        rec.grad_norm = gs.grad_x.norm();
        rec.y_grad_norm = gs.grad_y.norm();
        if (ref) {
          const Vector p = st.x_curr - gs.grad_x;
          rec.f_gap = rls_value_difference(problem.metric->instance(), p, ref->x_star);
          rec.lyapunov = lyapunov_igahd(obj, plan.params, *ref, st, metric_norm);
        }
        next = std::move(gs.next);
        break;
      }
      case Route::proximal: {
        next = ipahd_step(obj, *settings.schedule, st);
        rec.grad_norm = next.grad_prev.norm();
        if (ref) {
          rec.f_gap = objective_gap(obj, st.x_curr, *ref);
          rec.lyapunov = lyapunov_ipahd(obj, *settings.schedule, LyapunovSpec{lyap_lambda, *ref}, st);
        }
        break;
      }
      case Route::proximal_ns: {
        next = ipahd_ns_step(obj.prox, *settings.schedule, settings.theta, st);
        rec.grad_norm = next.grad_prev.norm();
        if (ref) {
          rec.f_gap = objective_gap(obj, obj.prox(st.x_curr, settings.theta), *ref);
          rec.lyapunov =
              lyapunov_ipahd(*envelope, *settings.schedule, LyapunovSpec{lyap_lambda, *ref}, st);
        }
        break;
      }
    }
    if (!ref) {
      rec.f_gap = std::numeric_limits<double>::quiet_NaN();
    } else {
      rec.distance = (st.x_curr - ref->x_star).norm();
    }
    result.trace.records.push_back(rec);

    if (!all_finite(next.x_curr)) {
      throw NumericError(std::string(to_string(method)) + ": non-finite iterate at iteration " +
                             std::to_string(st.k),
                         st.k);
    }

    const StoppingRule& stop = opts.stop;
    if (stop.gap_tol && ref && rec.f_gap <= *stop.gap_tol) {
      result.stop_reason = "gap_tol";
      break;
    }
    if (stop.grad_tol && rec.grad_norm <= *stop.grad_tol) {
      result.stop_reason = "grad_tol";
      break;
    }
    if (stop.velocity_tol && it > 0 && rec.velocity_norm <= *stop.velocity_tol) {
      result.stop_reason = "velocity_tol";
      break;
    }
    st = std::move(next);
  }
  if (opts.observer) opts.observer(st);
  result.final_state = std::move(st);
  return result;
}

}  // namespace

void validate_method(Method method, const Problem& problem, const SolverSettings& settings) {
  (void)make_plan(method, problem, settings);
}

RunResult run_solver(Method method, const Problem& problem, const SolverSettings& settings,
                     const RunOptions& opts) {
  if (opts.max_iter < 0) throw InputError("max_iter must be non-negative");
  const Plan plan = make_plan(method, problem, settings);

  std::optional<Reference> ref = opts.reference;
  if (!ref && !problem.metric) ref = known_reference(problem.objective);
  if (!ref && opts.max_iter > 0) {
    if (problem.metric) {
      ref = presolve_reference(*problem.metric, 10 * opts.max_iter);
    } else {
      RunOptions pre = opts;
      pre.max_iter = 10 * opts.max_iter;
      pre.observer = {};
      pre.stop = {};
      RunResult r = run_impl(method, problem, settings, pre, plan, std::nullopt);
      Vector xs = r.final_state.x_curr;
      if (plan.route == Route::proximal_ns) xs = problem.objective.prox(xs, settings.theta);
      ref = Reference{xs, problem.objective.value(xs)};
    }
  }
  return run_impl(method, problem, settings, opts, plan, ref);
}

Reference presolve_reference(const MetricRLS& mr, int budget) {
  if (budget < 1) throw InputError("presolve budget must be positive");
  const IGAHDParams fista{4.0, 0.0, 1.0};
  RunState st = warm_start(default_k_start(Method::fista, fista.alpha),
                           Vector::Zero(mr.dimension()),
                           grad_metric_rls(mr, Vector::Zero(mr.dimension())));
  for (int i = 0; i < budget; ++i) st = igahd_rls_step(mr, fista, st).next;
  Vector xs = prox_metric_rls(mr, st.x_curr);
  const double fs = rls_value(mr.instance(), xs);
  return Reference{std::move(xs), fs};
}

}  // namespace inertia_hd
