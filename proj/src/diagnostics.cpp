#include "inertia_hd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "inertia_hd/errors.hpp"

namespace inertia_hd {

namespace {

double sq(const SqNorm& n, const Vector& v) { return n ? n(v) : v.squaredNorm(); }

void require_lambda(double lambda, double alpha) {
  if (!(lambda > 0.0) || lambda > alpha - 1.0) {
    throw InputError("Lyapunov lambda must lie in (0, alpha - 1]");
  }
}

}  // namespace

double lyapunov_continuous(const Objective& obj, const ContinuousSchedule& cs,
                           const LyapunovSpec& spec, const TrajectoryPoint& p) {
  require_lambda(spec.lambda, cs.alpha);
  const double t = p.t;
  const double lambda = spec.lambda;
  const double beta = cs.beta(t);
  const Vector dx = p.x - spec.reference.x_star;
  const Vector v = lambda * dx + t * (p.v + beta * obj.gradient(p.x));
  const double delta = t * t * w_eval(cs, t) - (lambda + 1.0 - cs.alpha) * t * beta;
  const double c = lambda * (cs.alpha - 1.0 - lambda);
  return delta * objective_gap(obj, p.x, spec.reference) + 0.5 * v.squaredNorm() +
         0.5 * c * dx.squaredNorm();
}

double lyapunov_ipahd(const Objective& obj, const DiscreteSchedule& sched,
                      const LyapunovSpec& spec, const RunState& st) {
  require_lambda(spec.lambda, sched.alpha);
  const int k = st.k;
  const double lambda = spec.lambda;
  const GrowthQuantities gq = compute_growth(sched, lambda, k);
  const Vector dx = st.x_curr - spec.reference.x_star;
  const Vector v = lambda * dx + static_cast<double>(k) *
                                     (st.x_curr - st.x_prev +
                                      sched.beta_k(k) * sched.h * obj.gradient(st.x_curr));
  const double c = lambda * (sched.alpha - 1.0 - lambda);
  return gq.delta * objective_gap(obj, st.x_curr, spec.reference) + 0.5 * v.squaredNorm() +
         0.5 * c * dx.squaredNorm();
}

double lyapunov_igahd(const Objective& obj, const IGAHDParams& p, const Reference& ref,
                      const RunState& st, const SqNorm& sq_norm) {
  if (!(p.alpha > 1.0) || !(p.s > 0.0)) throw InputError("IGAHD energy needs alpha > 1, s > 0");
  const double tk = (st.k - 1.0) / (p.alpha - 1.0);
  const Vector v = (st.x_prev - ref.x_star) +
                   tk * (st.x_curr - st.x_prev + p.beta * std::sqrt(p.s) * st.grad_prev);
  return tk * tk * objective_gap(obj, st.x_curr, ref) + sq(sq_norm, v) / (2.0 * p.s);
}

double descent_lemma_slack(const Objective& obj, const Vector& x, const Vector& y, double s) {
  if (!(s > 0.0)) throw InputError("descent lemma step must be positive");
  const Vector gy = obj.gradient(y);
  const Vector gx = obj.gradient(x);
  const Vector z = y - s * gy;
  // f(x) - f(z) + <gy, y - x> - s/2 |gy|^2 - s/2 |gx - gy|^2
  return obj.difference(x, z) + gy.dot(y - x) - 0.5 * s * gy.squaredNorm() -
         0.5 * s * (gx - gy).squaredNorm();
}

std::string_view to_string(TraceField f) {
  switch (f) {
    case TraceField::f_gap: return "f_gap";
    case TraceField::grad_norm: return "grad_norm";
    case TraceField::velocity_norm: return "velocity_norm";
    case TraceField::lyapunov: return "lyapunov";
    case TraceField::y_grad_norm: return "y_grad_norm";
  }
  return "f_gap";
}

TraceField trace_field_from_string(std::string_view name) {
  for (TraceField f : {TraceField::f_gap, TraceField::grad_norm, TraceField::velocity_norm,
                       TraceField::lyapunov, TraceField::y_grad_norm}) {
    if (to_string(f) == name) return f;
  }
  throw InputError("unknown trace field '" + std::string(name) + "'");
}

std::vector<double> field_values(const RunTrace& trace, TraceField field) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> out;
  out.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    switch (field) {
      case TraceField::f_gap: out.push_back(r.f_gap); break;
      case TraceField::grad_norm: out.push_back(r.grad_norm); break;
      case TraceField::velocity_norm: out.push_back(r.velocity_norm); break;
      case TraceField::lyapunov: out.push_back(r.lyapunov.value_or(nan)); break;
      case TraceField::y_grad_norm: out.push_back(r.y_grad_norm.value_or(nan)); break;
    }
  }
  return out;
}

std::vector<double> trace_ks(const RunTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.records.size());
  for (const auto& r : trace.records) out.push_back(r.k);
  return out;
}

RateFit fit_power_law(std::span<const double> ks, std::span<const double> values) {
  if (ks.size() != values.size()) throw InputError("fit: ks and values differ in length");
  if (ks.size() < 2) throw InputError("fit: need at least two points");
  double sx = 0, sy = 0;
  const double n = static_cast<double>(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] > 0.0)) throw InputError("fit: k must be positive");
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw InputError("fit: values must be positive and finite");
    }
    sx += std::log(ks[i]);
    sy += std::log(values[i]);
  }
  const auto [lo_it, hi_it] = std::minmax_element(ks.begin(), ks.end());
  RateFit fit;
  fit.k_lo = *lo_it;
  fit.k_hi = *hi_it;
  if (!(fit.k_hi > 2.0 * fit.k_lo)) throw InputError("fit: range must span more than a factor 2");
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double dx = std::log(ks[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(values[i]) - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double r = std::log(values[i]) - (fit.intercept + fit.slope * std::log(ks[i]));
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / n);
  fit.points = static_cast<int>(ks.size());
  return fit;
}

RateFit fit_rate_slope(const RunTrace& trace, TraceField field, double k_lo, double k_hi) {
  if (!(k_hi > 2.0 * k_lo)) throw InputError("fit: k_hi must exceed 2 k_lo");
  std::vector<double> ks, vs;
  const std::vector<double> all = field_values(trace, field);
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const double k = trace.records[i].k;
    if (k < k_lo || k > k_hi) continue;
    const double v = all[i];
    if (field == TraceField::f_gap && !(v >= kGapFloor)) continue;
    ks.push_back(k);
    vs.push_back(v);
  }
  return fit_power_law(ks, vs);
}

SummabilityResult summability_probe(std::span<const double> ks, std::span<const double> terms) {
  if (ks.size() != terms.size()) throw InputError("summability: ks and terms differ in length");
  SummabilityResult r;
  if (ks.empty()) return r;
  const double k_last = ks.back();
  double tail = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!std::isfinite(terms[i])) throw InputError("summability: non-finite term");
    r.total += terms[i];
    if (ks[i] >= k_last / 10.0) tail += terms[i];
  }
  r.tail_fraction = r.total != 0.0 ? tail / r.total : 0.0;
  return r;
}

SummabilityResult summability_probe(const RunTrace& trace,
                                    const std::function<double(double)>& weight, TraceField field,
                                    double power) {
  const std::vector<double> ks = trace_ks(trace);
  const std::vector<double> vals = field_values(trace, field);
  std::vector<double> terms(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    terms[i] = weight(ks[i]) * std::pow(std::abs(vals[i]), power);
  }
  return summability_probe(ks, terms);
}

int count_oscillations(std::span<const double> values) {
  int count = 0;
  int last_sign = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double d = values[i] - values[i - 1];
    if (std::abs(d) <= 1e-14) continue;
    const int sign = d > 0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) ++count;
    last_sign = sign;
  }
  return count;
}

int count_oscillations(const RunTrace& trace, TraceField field) {
  const std::vector<double> v = field_values(trace, field);
  return count_oscillations(v);
}

double final_to_middle_decade_ratio(std::span<const double> ks, std::span<const double> values) {
  if (ks.size() != values.size() || ks.empty()) throw InputError("decade ratio: bad input");
  const double K = ks.back();
  double final_max = 0.0, middle_max = 0.0;
  bool any_middle = false;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double v = std::abs(values[i]);
    if (ks[i] >= K / 10.0) {
      final_max = std::max(final_max, v);
    } else if (ks[i] >= K / 100.0) {
      middle_max = std::max(middle_max, v);
      any_middle = true;
    }
  }
  if (!any_middle) throw InputError("decade ratio: no samples in [K/100, K/10)");
  if (middle_max == 0.0) return final_max == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return final_max / middle_max;
}

bool running_max_settles(std::span<const double> ks, std::span<const double> values,
                         double k_burn) {
  if (ks.size() != values.size()) throw InputError("running max: bad input");
  double before = -std::numeric_limits<double>::infinity();
  double after = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] <= k_burn) {
      before = std::max(before, values[i]);
    } else {
      after = std::max(after, values[i]);
    }
  }
  return after <= before;
}

double max_relative_increase(std::span<const double> energies) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < energies.size(); ++i) {
    worst = std::max(worst, (energies[i] - energies[i - 1]) / (1.0 + std::abs(energies[i - 1])));
  }
  return worst;
}

}  // namespace inertia_hd
