#ifndef TSNL_SVG_HPP
#define TSNL_SVG_HPP

#include <string>
#include <utility>
#include <vector>

namespace tsnl {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Minimal hand-rolled SVG line chart; the CSVs remain the source of truth.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series, bool log_x = false,
                      bool log_y = false);

/// Bar chart for rank histograms, with a horizontal reference line at the
/// expected uniform height.
void write_bar_chart(const std::string& path, const std::string& title,
                     const std::vector<double>& heights, double reference);

}  // namespace tsnl

#endif  // TSNL_SVG_HPP
