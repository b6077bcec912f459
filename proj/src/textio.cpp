#include "fourierhead/textio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fourierhead {

namespace {

std::size_t significant_digits(const std::string& s) {
  std::size_t count = 0;
  bool seen_nonzero = false;
  for (char c : s) {
    if (c == 'e' || c == 'E') break;
    if (c >= '0' && c <= '9') {
      if (c != '0') seen_nonzero = true;
      if (seen_nonzero) ++count;
    }
  }
  return count;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string shortest(buf, res.ptr);
  if (significant_digits(shortest) <= 12) return shortest;
  res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

std::vector<double> read_column_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> values;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    // Use the first comma-separated field; tolerate trailing columns.
    const std::string field = line.substr(0, line.find(','));
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{}) {
      if (first) {
        first = false;
        continue;  // header row
      }
      throw std::runtime_error("bad numeric line in " + path + ": " + line);
    }
    first = false;
    values.push_back(v);
  }
  return values;
}

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series) {
  const double width = 640.0, height = 400.0, margin = 50.0;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (double x : s.xs) { xmin = std::min(xmin, x); xmax = std::max(xmax, x); }
    for (double y : s.ys) { ymin = std::min(ymin, y); ymax = std::max(ymax, y); }
  }
  if (!(xmax > xmin)) { xmax = xmin + 1.0; }
  if (!(ymax > ymin)) { ymax = ymin + 1.0; }

  const auto px = [&](double x) {
    return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
  };
  const auto py = [&](double y) {
    return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
  };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"" << height - margin + 16 << "\" font-size=\"11\">"
      << format_double(xmin) << "</text>\n";
  out << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 16
      << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(xmax) << "</text>\n";
  out << "<text x=\"" << margin - 4 << "\" y=\"" << height - margin
      << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(ymin) << "</text>\n";
  out << "<text x=\"" << margin - 4 << "\" y=\"" << margin << "\" text-anchor=\"end\" "
      << "font-size=\"11\">" << format_double(ymax) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kColors[i % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < s.xs.size(); ++j) {
      out << px(s.xs[j]) << ',' << py(s.ys[j]) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << width - margin + 4 << "\" y=\"" << margin + 16.0 * double(i)
        << "\" font-size=\"11\" fill=\"" << color << "\" text-anchor=\"end\">" << s.label
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace fourierhead
