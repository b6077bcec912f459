#pragma once

#include <string>
#include <vector>

namespace fourierhead {

// Canonical float text: shortest representation that round-trips, capped at
// 12 significant digits. Output files format every value through this so
// identical runs produce identical bytes.
std::string format_double(double v);

// Single-column CSV of reals; '#'-prefixed lines and a non-numeric first line
// (header) are skipped.
std::vector<double> read_column_csv(const std::string& path);

struct SvgSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};

// Minimal line chart, one polyline per series. Convenience output only; the
// CSV/JSON files are the contract.
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series);

}  // namespace fourierhead
