#include "inertia_hd/bench/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "inertia_hd/errors.hpp"

namespace inertia_hd::bench {

namespace {

/// Typed access to one table; remembers which keys were read so leftovers
/// can be reported as unknown.
class TableReader {
 public:
  TableReader(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

  template <class T>
  void get(std::string_view key, T& out) {
    const toml::node* n = find(key);
    if (n) out = convert<T>(*n, key);
  }

  template <class T>
  void get(std::string_view key, std::optional<T>& out) {
    const toml::node* n = find(key);
    if (n) out = convert<T>(*n, key);
  }

  void get_list(std::string_view key, std::vector<double>& out) {
    const toml::node* n = find(key);
    if (!n) return;
    const toml::array* arr = n->as_array();
    if (!arr) fail(key, "an array of numbers");
    out.clear();
    for (const toml::node& e : *arr) {
      auto v = e.value<double>();
      if (!v) fail(key, "an array of numbers");
      out.push_back(*v);
    }
  }

  void finish() const {
    for (const auto& [k, v] : t_) {
      if (!seen_.count(std::string(k.str()))) {
        throw InputError("unknown key '" + qualified(k.str()) + "'");
      }
    }
  }

 private:
  const toml::node* find(std::string_view key) {
    seen_.insert(std::string(key));
    return t_.get(key);
  }

  std::string qualified(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  [[noreturn]] void fail(std::string_view key, const char* what) const {
    throw InputError("'" + qualified(key) + "' must be " + what);
  }

  template <class T>
  T convert(const toml::node& n, std::string_view key) const {
    if constexpr (std::is_same_v<T, double>) {
      auto v = n.value<double>();
      if (!v) fail(key, "a number");
      return *v;
    } else if constexpr (std::is_same_v<T, bool>) {
      auto v = n.value_exact<bool>();
      if (!v) fail(key, "a boolean");
      return *v;
    } else if constexpr (std::is_same_v<T, std::string>) {
      auto v = n.value_exact<std::string>();
      if (!v) fail(key, "a string");
      return *v;
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      auto v = n.value_exact<std::int64_t>();
      if (!v || *v < 0) fail(key, "a non-negative integer");
      return static_cast<std::uint64_t>(*v);
    } else {
      static_assert(std::is_same_v<T, int>);
      auto v = n.value_exact<std::int64_t>();
      if (!v || *v < INT32_MIN || *v > INT32_MAX) fail(key, "an integer");
      return static_cast<int>(*v);
    }
  }

  const toml::table& t_;
  std::string path_;
  std::set<std::string> seen_;
};

const toml::table* subtable(const toml::table& root, std::string_view key) {
  const toml::node* n = root.get(key);
  if (!n) return nullptr;
  const toml::table* t = n->as_table();
  if (!t) throw InputError("'" + std::string(key) + "' must be a table");
  return t;
}

ProblemConfig read_problem(const toml::table& t) {
  ProblemConfig p;
  TableReader r(t, "problem");
  r.get("kind", p.kind);
  r.get("m", p.m);
  r.get("n", p.n);
  r.get("sparsity", p.sparsity);
  r.get("noise", p.noise);
  r.get("seed", p.seed);
  r.get("weight", p.weight);
  r.get("lambda_scale", p.lambda_scale);
  r.get("p", p.p);
  r.get("q", p.q);
  r.get("rank", p.rank);
  r.get_list("diag", p.diag);
  r.get_list("c", p.c);
  r.get_list("center", p.center);
  r.get_list("x1", p.x1);
  r.finish();
  if (p.kind != "lasso" && p.kind != "lowrank" && p.kind != "quadratic" && p.kind != "l1") {
    throw InputError("problem.kind must be lasso, lowrank, quadratic or l1");
  }
  return p;
}

MethodConfig read_method(const toml::table& t, std::size_t idx) {
  MethodConfig m;
  TableReader r(t, "methods[" + std::to_string(idx) + "]");
  r.get("name", m.name);
  if (m.name.empty()) throw InputError("methods[" + std::to_string(idx) + "].name is required");
  m.method = method_from_string(m.name);
  r.get("alpha", m.alpha);
  r.get("beta", m.beta);
  r.get("s", m.s);
  r.get("h", m.h);
  r.get("b", m.b);
  r.get("theta", m.theta);
  r.get("lyapunov_lambda", m.lyapunov_lambda);
  r.finish();
  return m;
}

ReportConfig read_report(const toml::table& t) {
  ReportConfig rc;
  TableReader r(t, "report");
  r.get("fit_k_lo", rc.fit_k_lo);
  r.get("fit_k_hi", rc.fit_k_hi);
  r.get("epsilon", rc.epsilon);
  r.get("b_lower", rc.b_lower);
  r.finish();
  return rc;
}

ScheduleConfig read_schedule(const toml::table& t) {
  ScheduleConfig s;
  TableReader r(t, "schedule");
  r.get("type", s.type);
  r.get("case", s.named_case);
  r.get("alpha", s.alpha);
  r.get("beta", s.beta);
  r.get("r", s.r);
  r.get("c", s.c);
  r.get("b_exp", s.b_exp);
  r.get("beta_exp", s.beta_exp);
  r.get("epsilon", s.epsilon);
  r.get("grid_start", s.grid_start);
  r.get("grid_end", s.grid_end);
  r.get("grid_points", s.grid_points);
  r.get("h", s.h);
  r.get("b", s.b);
  r.get("lambda", s.lambda);
  r.get("k_max", s.k_max);
  r.get("k_first", s.k_first);
  r.get("b_lower", s.b_lower);
  r.get("require_strengthened", s.require_strengthened);
  r.finish();
  if (s.type != "continuous" && s.type != "discrete") {
    throw InputError("schedule.type must be continuous or discrete");
  }
  return s;
}

OdeConfig read_ode(const toml::table& t) {
  OdeConfig o;
  TableReader r(t, "ode");
  r.get("t0", o.t0);
  r.get("t_end", o.t_end);
  r.get("tol", o.tol);
  r.get_list("x0", o.x0);
  r.get_list("v0", o.v0);
  r.get("fit_from", o.fit_from);
  r.get("samples", o.samples);
  r.finish();
  return o;
}

SweepConfig read_sweep(const toml::table& t) {
  SweepConfig s;
  TableReader r(t, "sweep");
  r.get_list("alpha", s.alpha);
  r.get_list("beta", s.beta);
  r.finish();
  return s;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config parse error: " << e.description() << " (line " << e.source().begin.line
       << ", column " << e.source().begin.column << ")";
    throw InputError(os.str());
  }

  ExperimentConfig cfg;
  cfg.source = std::string(text);
  TableReader top(root, "");
  top.get("max_iter", cfg.max_iter);
  top.get("out_dir", cfg.out_dir);
  if (const toml::table* t = subtable(root, "problem")) cfg.problem = read_problem(*t);
  if (const toml::node* n = root.get("methods")) {
    const toml::array* arr = n->as_array();
    if (!arr) throw InputError("'methods' must be an array of tables ([[methods]])");
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const toml::table* t = (*arr)[i].as_table();
      if (!t) throw InputError("'methods' must be an array of tables ([[methods]])");
      cfg.methods.push_back(read_method(*t, i));
    }
  }
  if (const toml::table* t = subtable(root, "report")) cfg.report = read_report(*t);
  if (const toml::table* t = subtable(root, "schedule")) cfg.schedule = read_schedule(*t);
  if (const toml::table* t = subtable(root, "ode")) cfg.ode = read_ode(*t);
  if (const toml::table* t = subtable(root, "sweep")) cfg.sweep = read_sweep(*t);

  for (const auto& [k, v] : root) {
    static const std::set<std::string> known{"max_iter", "out_dir", "problem", "methods",
                                             "report",   "schedule", "ode",    "sweep"};
    if (!known.count(std::string(k.str()))) {
      throw InputError("unknown key '" + std::string(k.str()) + "'");
    }
  }
  if (cfg.max_iter < 1) throw InputError("max_iter must be at least 1");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string config_digest(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace inertia_hd::bench
