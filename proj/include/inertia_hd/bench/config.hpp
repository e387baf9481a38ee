#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inertia_hd/inertial_algorithms.hpp"

namespace inertia_hd::bench {

struct ProblemConfig {
  /// lasso | lowrank | quadratic | l1
  std::string kind = "lasso";
  int m = 50;
  int n = 200;
  int sparsity = 10;
  double noise = 0.01;
  std::uint64_t seed = 42;
  double weight = 0.05;
  double lambda_scale = 0.9;
  int p = 10;
  int q = 10;
  int rank = 2;
  /// quadratic: Q = diag(diag), f = 1/2 x'Qx - c'x
  std::vector<double> diag{1.0, 10.0};
  std::vector<double> c;
  /// l1: f = weight |x - center|_1
  std::vector<double> center;
  /// Initial point; zero for lasso/lowrank, ones otherwise.
  std::vector<double> x1;
};

struct MethodConfig {
  std::string name;
  Method method = Method::igahd;
  double alpha = 4.0;
  double beta = 0.0;
  /// Defaults to 1/L.
  std::optional<double> s;
  double h = 1.0;
  double b = 1.0;
  double theta = 1.0;
  std::optional<double> lyapunov_lambda;
};

struct ReportConfig {
  std::optional<double> fit_k_lo;
  std::optional<double> fit_k_hi;
  double epsilon = 0.1;
  std::optional<double> b_lower;
};

struct ScheduleConfig {
  /// continuous | discrete
  std::string type = "continuous";
  std::string named_case = "one";
  double alpha = 3.5;
  double beta = 1.0;
  double r = 1.0;
  double c = 1.0;
  double b_exp = 0.0;
  double beta_exp = 1.0;
  std::optional<double> epsilon;
  double grid_start = 1.0;
  double grid_end = 100.0;
  int grid_points = 200;
  double h = 1.0;
  double b = 1.0;
  std::optional<double> lambda;
  int k_max = 1000;
  int k_first = 1;
  std::optional<double> b_lower;
  bool require_strengthened = false;
};

struct OdeConfig {
  double t0 = 1.0;
  double t_end = 100.0;
  double tol = 1e-10;
  std::vector<double> x0;
  std::vector<double> v0;
  std::optional<double> fit_from;
  int samples = 200;
};

struct SweepConfig {
  std::vector<double> alpha;
  std::vector<double> beta;
};

struct ExperimentConfig {
  ProblemConfig problem;
  std::vector<MethodConfig> methods;
  int max_iter = 1000;
  std::string out_dir = "out";
  ReportConfig report;
  std::optional<ScheduleConfig> schedule;
  std::optional<OdeConfig> ode;
  std::optional<SweepConfig> sweep;
  /// Raw document text, for the digest.
  std::string source;
};

/// Parses a TOML document. Unknown keys and ill-typed values raise InputError.
ExperimentConfig parse_config(std::string_view text, std::string_view source_name = "config");
ExperimentConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string config_digest(std::string_view text);

}  // namespace inertia_hd::bench
