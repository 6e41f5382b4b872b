// Minimal hand-emitted SVG line charts. Plots are always rendered from a CSV
// file the run already wrote, never from recomputed data.

#pragma once

#include <string>
#include <vector>

namespace ehrenfest {

struct PlotSeries {
  std::string x_column;
  std::string y_column;
  std::string color;  // css color
};

void svg_line_chart(const std::string& csv_path, const std::vector<PlotSeries>& series,
                    const std::string& out_path, const std::string& title);

}  // namespace ehrenfest
