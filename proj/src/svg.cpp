#include "ehrenfest/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "ehrenfest/csv.hpp"

namespace ehrenfest {

namespace {

constexpr double kW = 720.0, kH = 480.0;
constexpr double kL = 70.0, kR = 20.0, kT = 40.0, kB = 50.0;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void svg_line_chart(const std::string& csv_path, const std::vector<PlotSeries>& series,
                    const std::string& out_path, const std::string& title) {
  if (series.empty()) throw std::runtime_error("svg_line_chart: no series");
  const CsvTable t = read_csv(csv_path);

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  std::vector<std::pair<std::vector<double>, std::vector<double>>> data;
  for (const auto& s : series) {
    auto xs = t.column_values(s.x_column);
    auto ys = t.column_values(s.y_column);
    for (double v : xs) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : ys) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
    data.emplace_back(std::move(xs), std::move(ys));
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) {
    ymax = ymin + 1.0;
    ymin -= 1.0;
  }
  const double padx = 0.02 * (xmax - xmin), pady = 0.05 * (ymax - ymin);
  xmin -= padx;
  xmax += padx;
  ymin -= pady;
  ymax += pady;

  auto px = [&](double x) { return kL + (x - xmin) / (xmax - xmin) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (y - ymin) / (ymax - ymin) * (kH - kT - kB); };

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open " + out_path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
         "font-family=\"sans-serif\">" << title << "</text>\n";

  // axes + ticks
  out << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\""
      << kH - kB << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    out << "<line x1=\"" << px(xv) << "\" y1=\"" << kH - kB << "\" x2=\"" << px(xv) << "\" y2=\""
        << kH - kB + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(xv) << "\" y=\"" << kH - kB + 20
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << num(xv)
        << "</text>\n";
    out << "<line x1=\"" << kL - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << kL << "\" y2=\""
        << py(yv) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kL - 8 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << num(yv)
        << "</text>\n";
  }
  out << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
      << series.front().x_column << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill=\"none\" stroke=\"" << series[s].color << "\" stroke-width=\"1.5\" points=\"";
    const auto& [xs, ys] = data[s];
    for (std::size_t i = 0; i < xs.size(); ++i)
      out << px(xs[i]) << ',' << py(ys[i]) << ' ';
    out << "\"/>\n";
    // legend
    const double ly = kT + 16.0 * static_cast<double>(s);
    out << "<line x1=\"" << kW - kR - 130 << "\" y1=\"" << ly << "\" x2=\"" << kW - kR - 110
        << "\" y2=\"" << ly << "\" stroke=\"" << series[s].color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kW - kR - 105 << "\" y=\"" << ly + 4
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << series[s].y_column << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace ehrenfest
