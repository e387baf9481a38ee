#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace inertia_hd {

enum class VerdictStatus { holds, fails, holds_asymptotically };

std::string_view to_string(VerdictStatus s);

/// Verdict for one named condition, evaluated on a sampled grid only.
struct ConditionVerdict {
  std::string name;
  VerdictStatus status = VerdictStatus::holds;
  /// Grid location (t or k) of the first violation.
  std::optional<double> first_violation;
  /// First grid location after which no violation occurs; for limit
  /// conditions, the start of the window the decay was assessed on.
  std::optional<double> holds_from;
  std::string note;

  bool ok() const { return status != VerdictStatus::fails; }
};

struct ConditionReport {
  std::vector<ConditionVerdict> verdicts;
  double epsilon_used = 0.0;
  std::vector<double> grid;

  bool all_hold() const;
  const ConditionVerdict& at(std::string_view name) const;
  const ConditionVerdict* first_failure() const;
  /// Plain-text table, one row per condition.
  std::string to_table(std::string_view location_label) const;
};

namespace detail {

/// Builds a verdict from per-point pass flags over `grid`.
ConditionVerdict scan_verdict(std::string name, const std::vector<double>& grid,
                              const std::vector<bool>& pass);

/// Limit condition lim q = 0 judged on the final decade of the grid: q must be
/// non-increasing in magnitude there and shrink by at least half across it.
ConditionVerdict decay_verdict(std::string name, const std::vector<double>& grid,
                               const std::vector<double>& q);

}  // namespace detail

}  // namespace inertia_hd
