#pragma once

#include <string>
#include <vector>

namespace spiked::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string line_plot(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series);

struct Histogram {
  std::string label;
  std::vector<double> edges;  // bins + 1
  std::vector<double> counts;
};

std::string histogram_plot(const std::string& title, const std::vector<Histogram>& panels);

}  // namespace spiked::cli
