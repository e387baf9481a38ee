#include "inertia_hd/bench/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "inertia_hd/bench/svg.hpp"
#include "inertia_hd/diagnostics.hpp"
#include "inertia_hd/errors.hpp"

namespace inertia_hd::bench {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Writes files into the output directory and keeps the manifest.
class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericError("cannot write '" + (dir_ / name).string() + "'");
    out << content;
    if (!out) throw NumericError("write failed for '" + (dir_ / name).string() + "'");
    manifest_.push_back(name);
  }

  const std::vector<std::string>& manifest() const { return manifest_; }
  const fs::path& path() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> manifest_;
};

ordered_json verdict_json(const ConditionVerdict& v) {
  ordered_json j;
  j["name"] = v.name;
  j["status"] = std::string(to_string(v.status));
  j["first_violation"] = v.first_violation ? ordered_json(*v.first_violation) : ordered_json();
  j["holds_from"] = v.holds_from ? ordered_json(*v.holds_from) : ordered_json();
  j["note"] = v.note;
  return j;
}

ordered_json report_json(const ConditionReport& r) {
  ordered_json j;
  j["all_hold"] = r.all_hold();
  j["epsilon_used"] = r.epsilon_used;
  if (!r.grid.empty()) {
    j["grid"] = {{"first", r.grid.front()}, {"last", r.grid.back()}, {"points", r.grid.size()}};
  }
  j["verdicts"] = ordered_json::array();
  for (const auto& v : r.verdicts) j["verdicts"].push_back(verdict_json(v));
  return j;
}

ordered_json fit_json(std::string_view field, const std::vector<double>& ks,
                      const std::vector<double>& vals, double k_lo, double k_hi) {
  ordered_json j;
  j["field"] = std::string(field);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < k_lo || ks[i] > k_hi || !(vals[i] >= kGapFloor)) continue;
    x.push_back(ks[i]);
    y.push_back(vals[i]);
  }
  try {
    const RateFit f = fit_power_law(x, y);
    j["slope"] = f.slope;
    j["intercept"] = f.intercept;
    j["k_lo"] = f.k_lo;
    j["k_hi"] = f.k_hi;
    j["residual"] = f.residual;
    j["points"] = f.points;
  } catch (const InputError& e) {
    j["slope"] = nullptr;
    j["error"] = e.what();
  }
  return j;
}

/// Parameter constraints of the gradient methods, as a report.
ConditionReport igahd_constraints(const IGAHDParams& p, double L) {
  auto verdict = [](std::string name, bool ok, std::string note) {
    ConditionVerdict v;
    v.name = std::move(name);
    v.status = ok ? VerdictStatus::holds : VerdictStatus::fails;
    v.note = std::move(note);
    return v;
  };
  ConditionReport r;
  r.verdicts.push_back(verdict("alpha", p.alpha >= 3.0, "alpha ≥ 3"));
  r.verdicts.push_back(verdict("beta", p.beta >= 0.0 && p.beta < 2.0 * std::sqrt(p.s),
                               "0 ≤ beta < 2 sqrt(s)"));
  r.verdicts.push_back(verdict("step", p.s * L <= 1.0, "sL ≤ 1"));
  return r;
}

bool uses_schedule(Method m) { return m == Method::ipahd || m == Method::ipahd_ns; }

struct MethodOutcome {
  ordered_json json;
  RunTrace trace;
  std::string label;
};

MethodOutcome run_one(const ExperimentConfig& cfg, const BuiltProblem& bp, const MethodConfig& mc,
                      std::size_t idx, const std::string& csv_name, OutputDir& out_dir) {
  const SolverSettings settings = settings_for(mc, bp);
  RunOptions opts;
  opts.max_iter = cfg.max_iter;
  opts.x1 = bp.x1;
  opts.reference = bp.reference;
  opts.lyapunov_lambda = mc.lyapunov_lambda;

  const auto t0 = Clock::now();
  RunResult res;
  try {
    res = run_solver(mc.method, bp.problem, settings, opts);
  } catch (const NumericError& e) {
    throw NumericError("method #" + std::to_string(idx) + " (" + method_label(mc) + "): " + e.what(),
                       e.where());
  }
  const double elapsed = seconds_since(t0);
  out_dir.write(csv_name, res.trace.to_csv());

  const std::vector<double> ks = trace_ks(res.trace);
  const double k_start = ks.empty() ? 1.0 : ks.front();
  const double k_last = ks.empty() ? 1.0 : ks.back();
  const double k_lo = cfg.report.fit_k_lo.value_or(std::max(k_start, cfg.max_iter / 50.0));
  const double k_hi = cfg.report.fit_k_hi.value_or(k_last);

  ordered_json j;
  j["index"] = idx;
  j["name"] = std::string(to_string(mc.method));
  j["label"] = method_label(mc);
  ordered_json params;
  if (uses_schedule(mc.method)) {
    params = {{"alpha", mc.alpha}, {"beta", mc.beta}, {"h", mc.h}, {"b", mc.b}};
    if (mc.method == Method::ipahd_ns) params["theta"] = mc.theta;
  } else {
    params = {{"alpha", settings.igahd.alpha},
              {"beta", settings.igahd.beta},
              {"s", settings.igahd.s}};
  }
  j["params"] = params;
  j["k_start"] = k_start;
  j["iterations"] = res.trace.size();
  j["stop_reason"] = res.stop_reason;
  if (!res.trace.empty()) {
    j["final"] = {{"f_gap", res.trace.records.back().f_gap},
                  {"grad_norm", res.trace.records.back().grad_norm}};
  }
  j["rate_fits"] = ordered_json::array();
  for (TraceField f : {TraceField::f_gap, TraceField::grad_norm}) {
    j["rate_fits"].push_back(fit_json(to_string(f), ks, field_values(res.trace, f), k_lo, k_hi));
  }
  j["oscillations"] = {{"f_gap", count_oscillations(res.trace, TraceField::f_gap)},
                       {"grad_norm", count_oscillations(res.trace, TraceField::grad_norm)}};

  ConditionReport cr;
  if (uses_schedule(mc.method)) {
    const double lambda = mc.lyapunov_lambda.value_or(mc.alpha - 1.0);
    cr = validate_discrete_conditions(*settings.schedule, lambda, static_cast<int>(k_last),
                                      cfg.report.epsilon,
                                      cfg.report.b_lower.value_or(0.5 * mc.h * mc.b));
  } else {
    cr = igahd_constraints(settings.igahd, bp.lipschitz);
  }
  j["condition_report"] = report_json(cr);
  j["files"] = {csv_name};
  j["wall_clock_seconds"] = elapsed;
  return {std::move(j), std::move(res.trace), method_label(mc)};
}

ordered_json problem_json(const ExperimentConfig& cfg, const BuiltProblem& bp) {
  const ProblemConfig& p = cfg.problem;
  ordered_json j;
  j["kind"] = p.kind;
  j["seed"] = p.seed;
  j["dimension"] = bp.x1.size();
  if (p.kind == "lasso") {
    j["m"] = p.m, j["n"] = p.n, j["sparsity"] = p.sparsity, j["noise"] = p.noise;
  } else if (p.kind == "lowrank") {
    j["p"] = p.p, j["q"] = p.q, j["rank"] = p.rank, j["m"] = p.m;
  }
  if (bp.problem.metric) {
    j["weight"] = bp.problem.metric->instance().weight;
    j["lambda_metric"] = bp.problem.metric->lambda();
  }
  j["lipschitz"] = bp.lipschitz;
  if (bp.reference) j["f_star"] = bp.reference->f_star;
  return j;
}

void validate_methods(const std::vector<MethodConfig>& methods, const BuiltProblem& bp) {
  if (methods.empty()) throw InputError("config has no [[methods]] entries");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    try {
      validate_method(methods[i].method, bp.problem, settings_for(methods[i], bp));
    } catch (const std::logic_error& e) {
      throw InputError("method #" + std::to_string(i) + " (" + method_label(methods[i]) +
                       "): " + e.what());
    }
  }
}

std::string csv_name_for(std::size_t idx, const std::string& stem) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu_", idx);
  return buf + stem + ".csv";
}

template <class Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const CapabilityError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return kNumericError;
  }
}

ExperimentConfig load_with(const std::string& path, const Overrides& ov) {
  ExperimentConfig cfg = load_config(path);
  apply_overrides(cfg, ov);
  return cfg;
}

}  // namespace

void apply_overrides(ExperimentConfig& cfg, const Overrides& ov) {
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.seed) cfg.problem.seed = *ov.seed;
  if (ov.max_iter) {
    if (*ov.max_iter < 1) throw InputError("--max-iter must be at least 1");
    cfg.max_iter = *ov.max_iter;
  }
}

BuiltProblem build_problem(const ProblemConfig& pc, int max_iter) {
  GeneratorOptions gopts;
  gopts.weight = pc.weight;
  gopts.lambda_scale = pc.lambda_scale;
  std::optional<BuiltProblem> out;
  if (pc.kind == "lasso" || pc.kind == "lowrank") {
    RLSInstance inst = pc.kind == "lasso"
                           ? gen_lasso_instance(pc.m, pc.n, pc.sparsity, pc.noise, pc.seed, gopts)
                           : gen_lowrank_instance(pc.p, pc.q, pc.rank, pc.m, pc.seed, gopts);
    MetricRLS mr(std::move(inst));
    const Index n = mr.dimension();
    Reference ref = presolve_reference(mr, 10 * max_iter);
    out = BuiltProblem{Problem::from_rls(std::move(mr)), Vector::Zero(n), std::move(ref), 1.0};
  } else if (pc.kind == "quadratic") {
    if (pc.diag.empty()) throw InputError("problem.diag must not be empty");
    const Vector d = to_vector(pc.diag);
    const Vector c = pc.c.empty() ? Vector::Zero(d.size()) : to_vector(pc.c);
    if (c.size() != d.size()) throw InputError("problem.c must match problem.diag in length");
    Objective obj = make_quadratic(d.asDiagonal().toDenseMatrix(), c);
    const double L = obj.lipschitz_L.value_or(1.0);
    std::optional<Reference> ref = known_reference(obj);
    out = BuiltProblem{Problem::from_objective(std::move(obj)), Vector::Ones(d.size()), ref,
                       L > 0.0 ? L : 1.0};
  } else if (pc.kind == "l1") {
    if (pc.center.empty()) throw InputError("problem.center must not be empty");
    Objective obj = make_l1_objective(to_vector(pc.center), pc.weight);
    std::optional<Reference> ref = known_reference(obj);
    const Index n = obj.dimension;
    out = BuiltProblem{Problem::from_objective(std::move(obj)), Vector::Ones(n), ref, 1.0};
  } else {
    throw InputError("unknown problem kind '" + pc.kind + "'");
  }
  if (!pc.x1.empty()) {
    if (static_cast<Index>(pc.x1.size()) != out->x1.size()) {
      throw InputError("problem.x1 has length " + std::to_string(pc.x1.size()) + ", expected " +
                       std::to_string(out->x1.size()));
    }
    out->x1 = to_vector(pc.x1);
  }
  return std::move(*out);
}

SolverSettings settings_for(const MethodConfig& mc, const BuiltProblem& bp) {
  SolverSettings s;
  s.igahd = IGAHDParams{mc.alpha, mc.beta, mc.s.value_or(1.0 / bp.lipschitz)};
  if (uses_schedule(mc.method)) s.schedule = DiscreteSchedule::constant(mc.alpha, mc.h, mc.beta, mc.b);
  s.theta = mc.theta;
  return s;
}

std::string method_label(const MethodConfig& mc) {
  std::string label = std::string(to_string(mc.method)) + " a=" + fmt_g(mc.alpha);
  if (mc.method != Method::fista) label += " b=" + fmt_g(mc.beta);
  if (uses_schedule(mc.method)) label += " h=" + fmt_g(mc.h);
  return label;
}

ContinuousSchedule continuous_schedule_for(const ScheduleConfig& sc, double t0) {
  switch (named_case_from_string(sc.named_case)) {
    case NamedCase::one: return ContinuousSchedule::case_one(sc.alpha, sc.beta, t0);
    case NamedCase::two: return ContinuousSchedule::case_two(sc.alpha, sc.beta, t0);
    case NamedCase::three: return ContinuousSchedule::case_three(sc.alpha, sc.r, t0);
    case NamedCase::four:
      return ContinuousSchedule::case_four(sc.alpha, sc.c, sc.b_exp, sc.beta_exp, t0);
  }
  throw InputError("unknown schedule case");
}

int cmd_run(const std::string& config_path, const Overrides& ov, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    const auto t_total = Clock::now();
    const ExperimentConfig cfg = load_with(config_path, ov);
    const BuiltProblem bp = build_problem(cfg.problem, cfg.max_iter);
    validate_methods(cfg.methods, bp);

    OutputDir dir(cfg.out_dir);
    ordered_json report;
    report["config_digest"] = config_digest(cfg.source);
    report["command"] = "run";
    report["max_iter"] = cfg.max_iter;
    report["problem"] = problem_json(cfg, bp);
    report["methods"] = ordered_json::array();

    std::vector<Series> gap_series, dist_series;
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
      const MethodConfig& mc = cfg.methods[i];
      MethodOutcome mo = run_one(cfg, bp, mc, i, csv_name_for(i, std::string(to_string(mc.method))), dir);
      Series g{mo.label, trace_ks(mo.trace), field_values(mo.trace, TraceField::f_gap)};
      Series d{mo.label, trace_ks(mo.trace), {}};
      for (const auto& r : mo.trace.records) d.y.push_back(r.distance.value_or(std::nan("")));
      gap_series.push_back(std::move(g));
      dist_series.push_back(std::move(d));
      const auto& fit = mo.json["rate_fits"][0];
      out << mo.label << ": f_gap slope "
          << (fit["slope"].is_null() ? std::string("n/a") : fmt_g(fit["slope"].get<double>()))
          << ", oscillations " << mo.json["oscillations"]["f_gap"].get<int>() << ", final f_gap "
          << fmt_g(mo.json["final"]["f_gap"].get<double>()) << "\n";
      report["methods"].push_back(std::move(mo.json));
    }
    const std::string gap_title = bp.problem.metric ? "f(prox_M(x_k)) - f*" : "f(x_k) - f*";
    dir.write("f_gap.svg", loglog_svg(gap_title, "k", "f_gap", gap_series));
    dir.write("distance.svg", loglog_svg("|x_k - x*|", "k", "distance", dist_series));

    std::vector<std::string> manifest = dir.manifest();
    manifest.push_back("report.json");
    report["manifest"] = manifest;
    report["wall_clock_seconds"] = seconds_since(t_total);
    dir.write("report.json", report.dump(2) + "\n");
    out << "wrote " << manifest.size() << " files to " << dir.path().string() << "\n";
    return kOk;
  });
}

int cmd_sweep(const std::string& config_path, const Overrides& ov, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const auto t_total = Clock::now();
    const ExperimentConfig cfg = load_with(config_path, ov);
    if (!cfg.sweep) throw InputError("sweep needs a [sweep] table");
    if (cfg.sweep->alpha.empty() || cfg.sweep->beta.empty()) {
      throw InputError("sweep axes alpha and beta must both be non-empty");
    }
    MethodConfig base;
    base.method = Method::igahd;
    base.name = "igahd";
    if (!cfg.methods.empty()) base = cfg.methods.front();

    std::vector<MethodConfig> cells;
    for (double a : cfg.sweep->alpha) {
      for (double b : cfg.sweep->beta) {
        MethodConfig mc = base;
        mc.alpha = a;
        mc.beta = b;
        cells.push_back(mc);
      }
    }
    const BuiltProblem bp = build_problem(cfg.problem, cfg.max_iter);
    validate_methods(cells, bp);

    OutputDir dir(cfg.out_dir);
    ordered_json report;
    report["config_digest"] = config_digest(cfg.source);
    report["command"] = "sweep";
    report["max_iter"] = cfg.max_iter;
    report["problem"] = problem_json(cfg, bp);
    report["axes"] = {{"alpha", cfg.sweep->alpha}, {"beta", cfg.sweep->beta}};
    report["methods"] = ordered_json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const MethodConfig& mc = cells[i];
      const std::string stem = std::string(to_string(mc.method)) + "_a" + fmt_g(mc.alpha) + "_b" +
                               fmt_g(mc.beta);
      MethodOutcome mo = run_one(cfg, bp, mc, i, csv_name_for(i, stem), dir);
      const auto& fit = mo.json["rate_fits"][0];
      out << mo.label << ": f_gap slope "
          << (fit["slope"].is_null() ? std::string("n/a") : fmt_g(fit["slope"].get<double>()))
          << "\n";
      report["methods"].push_back(std::move(mo.json));
    }
    std::vector<std::string> manifest = dir.manifest();
    manifest.push_back("report.json");
    report["manifest"] = manifest;
    report["wall_clock_seconds"] = seconds_since(t_total);
    dir.write("report.json", report.dump(2) + "\n");
    out << cells.size() << " sweep cells; wrote " << manifest.size() << " files to "
        << dir.path().string() << "\n";
    return kOk;
  });
}

int cmd_check(const std::string& config_path, const Overrides& ov, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_with(config_path, ov);
    if (!cfg.schedule) throw InputError("check needs a [schedule] table");
    const ScheduleConfig& sc = *cfg.schedule;

    ConditionReport report;
    std::vector<std::string> required;
    std::string where;
    if (sc.type == "continuous") {
      if (!(sc.grid_start > 0.0) || !(sc.grid_end > sc.grid_start) || sc.grid_points < 2) {
        throw InputError("schedule grid needs 0 < grid_start < grid_end and grid_points >= 2");
      }
      const ContinuousSchedule cs = continuous_schedule_for(sc, sc.grid_start);
      const std::vector<double> grid = log_grid(sc.grid_start, sc.grid_end, sc.grid_points);
      report = check_continuous_conditions(cs, sc.epsilon, grid);
      required = {"C1", "C2", "C3", "C4", "C5"};
      where = "t";

      CaseParams cp;
      cp.alpha = sc.alpha;
      cp.r = sc.r;
      cp.c = sc.c;
      cp.b_exp = sc.b_exp;
      const NamedCase nc = named_case_from_string(sc.named_case);
      cp.beta = nc == NamedCase::four ? sc.beta_exp : sc.beta;
      const CaseVerdict cv = named_case_conditions(nc, cp);
      out << "closed form (case " << sc.named_case << "): "
          << (!cv.determined ? "undetermined" : cv.holds ? (cv.asymptotic ? "holds for large t" : "holds") : "fails")
          << "; " << cv.region << "\n";
    } else {
      const DiscreteSchedule sched = DiscreteSchedule::constant(sc.alpha, sc.h, sc.beta, sc.b);
      const double lambda = sc.lambda.value_or(sc.alpha - 1.0);
      if (sc.k_first < 1 || sc.k_max < sc.k_first + 1) {
        throw InputError("schedule needs 1 <= k_first < k_max");
      }
      report = validate_discrete_conditions(sched, lambda, sc.k_max, sc.epsilon.value_or(0.1),
                                            sc.b_lower.value_or(0.5 * sc.h * sc.b), sc.k_first);
      required = {"G1", "G2", "G3"};
      if (sc.require_strengthened) required = {"G1", "G2", "G1+", "G2+", "G3"};
      where = "k";
    }
    out << report.to_table(where);

    for (const std::string& name : required) {
      const ConditionVerdict& v = report.at(name);
      if (!v.ok()) {
        out << "first violation: " << name << " at " << where << " = "
            << (v.first_violation ? fmt_g(*v.first_violation) : std::string("?")) << "\n";
        return kConditionFailure;
      }
    }
    out << "all required conditions hold on the grid\n";
    return kOk;
  });
}

int cmd_ode(const std::string& config_path, const Overrides& ov, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    const auto t_total = Clock::now();
    const ExperimentConfig cfg = load_with(config_path, ov);
    if (!cfg.schedule || cfg.schedule->type != "continuous") {
      throw InputError("ode needs a continuous [schedule] table");
    }
    if (cfg.problem.kind != "quadratic") {
      throw InputError("ode needs a smooth problem (problem.kind = \"quadratic\")");
    }
    const OdeConfig oc = cfg.ode.value_or(OdeConfig{});
    if (!(oc.t0 > 0.0) || !(oc.t_end > oc.t0)) throw InputError("ode needs 0 < t0 < t_end");
    if (!(oc.tol > 0.0)) throw InputError("ode.tol must be positive");
    if (oc.samples < 2) throw InputError("ode.samples must be at least 2");

    const BuiltProblem bp = build_problem(cfg.problem, cfg.max_iter);
    const Objective& obj = bp.problem.objective;
    const Index n = obj.dimension;
    const Vector x0 = oc.x0.empty() ? bp.x1 : to_vector(oc.x0);
    const Vector v0 = oc.v0.empty() ? Vector::Zero(n) : to_vector(oc.v0);
    if (x0.size() != n || v0.size() != n) throw InputError("ode.x0 and ode.v0 must have length " + std::to_string(n));
    const ContinuousSchedule cs = continuous_schedule_for(*cfg.schedule, oc.t0);
    cs.validate();
    if (cs.alpha <= 1.0) throw InputError("ode needs alpha > 1");

    IntegrateOptions io;
    io.log_samples = oc.samples;
    io.include_steps = false;
    const std::vector<TrajectoryPoint> traj = integrate_trajectory(obj, cs, x0, v0, oc.t_end, oc.tol, io);

    const std::optional<Reference>& ref = bp.reference;
    std::ostringstream csv;
    csv << "t,f_gap,grad_norm,velocity_norm,lyapunov\n";
    std::vector<double> ts, gaps, energies;
    char line[160];
    for (const auto& p : traj) {
      const double gap = ref ? objective_gap(obj, p.x, *ref) : std::nan("");
      std::string lyap;
      if (ref) {
        const double e = lyapunov_continuous(obj, cs, LyapunovSpec{cs.alpha - 1.0, *ref}, p);
        energies.push_back(e);
        std::snprintf(line, sizeof line, "%.17g", e);
        lyap = line;
      }
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,", p.t, gap, obj.gradient(p.x).norm(), p.v.norm());
      csv << line << lyap << "\n";
      ts.push_back(p.t);
      gaps.push_back(gap);
    }

    double hi = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (gaps[i] >= kGapFloor) hi = ts[i];
    }
    const double lo = oc.fit_from.value_or(hi / 10.0);
    ordered_json fit = fit_json("f_gap", ts, gaps, lo, hi);

    OutputDir dir(cfg.out_dir);
    dir.write("trajectory.csv", csv.str());
    dir.write("f_gap.svg", loglog_svg("f(x(t)) - f*", "t", "f_gap", {Series{"trajectory", ts, gaps}}));

    ordered_json report;
    report["config_digest"] = config_digest(cfg.source);
    report["command"] = "ode";
    report["schedule"] = {{"case", cfg.schedule->named_case}, {"alpha", cs.alpha}, {"t0", oc.t0},
                          {"t_end", oc.t_end}, {"tol", oc.tol}};
    report["samples"] = traj.size();
    report["rate_fit"] = fit;
    if (!energies.empty()) report["lyapunov_max_relative_increase"] = max_relative_increase(energies);
    std::vector<std::string> manifest = dir.manifest();
    manifest.push_back("report.json");
    report["manifest"] = manifest;
    report["wall_clock_seconds"] = seconds_since(t_total);
    dir.write("report.json", report.dump(2) + "\n");

    out << "f_gap slope " << (fit["slope"].is_null() ? std::string("n/a") : fmt_g(fit["slope"].get<double>()));
    if (!fit["slope"].is_null()) out << " over t in [" << fmt_g(fit["k_lo"].get<double>()) << ", " << fmt_g(fit["k_hi"].get<double>()) << "]";
    out << "\nwrote " << manifest.size() << " files to " << dir.path().string() << "\n";
    return kOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inertial methods with Hessian-driven damping: runs, checks, ODE paths and sweeps"};
  app.require_subcommand(1);
  std::string config;
  Overrides ov;
  std::string out_dir;
  std::uint64_t seed = 0;
  int max_iter = 0;

  int code = kOk;
  auto add = [&](const std::string& name, const std::string& help,
                 int (*fn)(const std::string&, const Overrides&, std::ostream&, std::ostream&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "TOML experiment file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "problem seed");
    sub->add_option("--max-iter", max_iter, "iteration budget");
    sub->callback([&, sub, fn] {
      if (sub->count("--out")) ov.out_dir = out_dir;
      if (sub->count("--seed")) ov.seed = seed;
      if (sub->count("--max-iter")) ov.max_iter = max_iter;
      code = fn(config, ov, out, err);
    });
  };
  add("run", "run every configured method and write traces, plots and a report", &cmd_run);
  add("check", "check the growth conditions of a schedule", &cmd_check);
  add("ode", "integrate the continuous dynamic", &cmd_ode);
  add("sweep", "run the alpha x beta grid of the first method", &cmd_sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }
  return code;
}

}  // namespace inertia_hd::bench
