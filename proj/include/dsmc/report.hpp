#pragma once

// CSV rows and SVG line plots.

#include <ostream>
#include <string>
#include <vector>

#include "dsmc/config.hpp"
#include "dsmc/metrics.hpp"

namespace dsmc {

// RFC 4180 field quoting.
std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

// Fixed-precision number, "NA" for non-finite values.
std::string fmt(double v, int digits = 6);

// One row per run. The leading columns are fixed; counts and standard errors
// of the latency means follow, then the run label.
const std::vector<std::string>& run_csv_header();
std::vector<std::string> run_csv_row(const RunConfig& cfg, const SimStats& stats);

void write_comparison(std::ostream& os, const std::string& pattern, const Comparison& c, bool with_header);

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

// Self-contained SVG 1.1: axes with ticks, one polyline per series, legend.
std::string render_svg(const Plot& plot);

}  // namespace dsmc
