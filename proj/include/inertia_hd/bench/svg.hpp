#pragma once

#include <string>
#include <vector>

namespace inertia_hd::bench {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Log-log line chart. Points with a non-positive or non-finite coordinate
/// are skipped.
std::string loglog_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series);

}  // namespace inertia_hd::bench
