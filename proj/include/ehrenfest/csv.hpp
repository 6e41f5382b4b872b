#pragma once

#include <string>
#include <vector>

namespace ehrenfest {

// "%.17g" rendering used by every CSV emitter.
std::string format_g17(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
  std::vector<double> column_values(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace ehrenfest
