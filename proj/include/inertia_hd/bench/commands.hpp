#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "inertia_hd/bench/config.hpp"
#include "inertia_hd/continuous_dynamics.hpp"
#include "inertia_hd/inertial_algorithms.hpp"

namespace inertia_hd::bench {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericError = 2, kConditionFailure = 3 };

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iter;
};

void apply_overrides(ExperimentConfig& cfg, const Overrides& ov);

struct BuiltProblem {
  Problem problem;
  Vector x1;
  std::optional<Reference> reference;
  /// Lipschitz constant the default step 1/L refers to.
  double lipschitz = 1.0;
};

/// Generates the instance and, for lasso/lowrank, pre-solves a reference with
/// ten times the iteration budget.
BuiltProblem build_problem(const ProblemConfig& pc, int max_iter);

SolverSettings settings_for(const MethodConfig& mc, const BuiltProblem& bp);

/// e.g. "igahd a=4 b=0.5"
std::string method_label(const MethodConfig& mc);

ContinuousSchedule continuous_schedule_for(const ScheduleConfig& sc, double t0);

int cmd_run(const std::string& config_path, const Overrides& ov, std::ostream& out,
            std::ostream& err);
int cmd_check(const std::string& config_path, const Overrides& ov, std::ostream& out,
              std::ostream& err);
int cmd_ode(const std::string& config_path, const Overrides& ov, std::ostream& out,
            std::ostream& err);
int cmd_sweep(const std::string& config_path, const Overrides& ov, std::ostream& out,
              std::ostream& err);

/// Full command line: inertia-hd run|check|ode|sweep <config> [--out DIR]
/// [--seed N] [--max-iter N].
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace inertia_hd::bench
