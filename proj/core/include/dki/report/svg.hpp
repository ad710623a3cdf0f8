#pragma once

#include <span>
#include <string>
#include <vector>

#include "dki/signals/scores.hpp"

namespace dki::report {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Every plotted point carries data-series/data-x/data-y attributes holding the
// exact value, so an emitted file can be parsed back and checked.
std::string svg_line_plot(std::string_view title, std::string_view x_label, std::string_view y_label,
                          std::span<const Series> series, bool log2_x = false);

std::string svg_bar_chart(std::string_view title, std::string_view x_label, std::span<const std::string> labels,
                          std::span<const double> values);

// Cells carry data-row/data-col/data-value.
std::string svg_heatmap(std::string_view title, std::string_view row_label, std::string_view col_label,
                        const signals::Matrix& matrix);

}  // namespace dki::report
