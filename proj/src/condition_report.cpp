#include "inertia_hd/condition_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "inertia_hd/errors.hpp"

namespace inertia_hd {

std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::holds: return "holds";
    case VerdictStatus::fails: return "fails";
    case VerdictStatus::holds_asymptotically: return "holds asymptotically";
  }
  return "fails";
}

bool ConditionReport::all_hold() const {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const ConditionVerdict& v) { return v.ok(); });
}

const ConditionVerdict& ConditionReport::at(std::string_view name) const {
  for (const auto& v : verdicts) {
    if (v.name == name) return v;
  }
  throw InputError("no condition named '" + std::string(name) + "' in report");
}

const ConditionVerdict* ConditionReport::first_failure() const {
  for (const auto& v : verdicts) {
    if (!v.ok()) return &v;
  }
  return nullptr;
}

namespace {

std::string fmt_loc(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", *v);
  return buf;
}

}  // namespace

std::string ConditionReport::to_table(std::string_view location_label) const {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %-22s %-16s %-16s %s\n", "cond", "verdict",
                ("first fail " + std::string(location_label)).c_str(),
                ("holds from " + std::string(location_label)).c_str(), "note");
  os << line;
  for (const auto& v : verdicts) {
    std::snprintf(line, sizeof line, "%-6s %-22s %-16s %-16s %s\n", v.name.c_str(),
                  std::string(to_string(v.status)).c_str(), fmt_loc(v.first_violation).c_str(),
                  fmt_loc(v.holds_from).c_str(), v.note.c_str());
    os << line;
  }
  std::snprintf(line, sizeof line, "epsilon used: %g; grid: %zu points\n", epsilon_used,
                grid.size());
  os << line;
  return os.str();
}

namespace detail {

ConditionVerdict scan_verdict(std::string name, const std::vector<double>& grid,
                              const std::vector<bool>& pass) {
  ConditionVerdict v;
  v.name = std::move(name);
  std::optional<std::size_t> first_bad, last_bad;
  for (std::size_t i = 0; i < pass.size(); ++i) {
    if (!pass[i]) {
      if (!first_bad) first_bad = i;
      last_bad = i;
    }
  }
  if (!first_bad) {
    v.status = VerdictStatus::holds;
    if (!grid.empty()) v.holds_from = grid.front();
    return v;
  }
  v.status = VerdictStatus::fails;
  v.first_violation = grid[*first_bad];
  if (*last_bad + 1 < grid.size()) v.holds_from = grid[*last_bad + 1];
  return v;
}

ConditionVerdict decay_verdict(std::string name, const std::vector<double>& grid,
                               const std::vector<double>& q) {
  ConditionVerdict v;
  v.name = std::move(name);
  if (grid.empty()) {
    v.status = VerdictStatus::fails;
    v.note = "empty grid";
    return v;
  }
  const double t_end = grid.back();
  const double t_lo = std::max(grid.front(), t_end / 10.0);
  std::size_t lo = 0;
  while (lo < grid.size() && grid[lo] < t_lo) ++lo;
  lo = std::min(lo, grid.size() - 1);

  bool finite = true;
  bool monotone = true;
  for (std::size_t i = lo; i < grid.size(); ++i) {
    if (!std::isfinite(q[i])) finite = false;
    if (i > lo && std::abs(q[i]) > std::abs(q[i - 1]) * (1.0 + 1e-12) + 1e-300) monotone = false;
  }
  const double first = std::abs(q[lo]);
  const double last = std::abs(q.back());
  v.holds_from = grid[lo];
  if (finite && last == 0.0) {
    v.status = VerdictStatus::holds_asymptotically;
    v.note = "identically zero on the final decade";
  } else if (finite && monotone && last <= 0.5 * first) {
    v.status = VerdictStatus::holds_asymptotically;
    v.note = "limit inferred from monotone decay on the final decade of the grid";
  } else {
    v.status = VerdictStatus::fails;
    v.first_violation = grid[lo];
    v.note = "no monotone decay on the final decade of the grid";
  }
  return v;
}

}  // namespace detail

}  // namespace inertia_hd
