#include "sbe/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sbe/csv.hpp"

namespace sbe {

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& provenance,
                     const std::vector<std::string>& columns)
    : path_(path), out_(path), columns_(columns.size()) {
  if (!out_) throw std::runtime_error("cannot open output file: " + path.string());
  out_ << "# " << provenance << '\n';
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::logic_error("CsvWriter: row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
  if (!out_) throw std::runtime_error("write failed: " + path_.string());
}

namespace {

constexpr double kWidth = 720, kHeight = 440, kLeft = 80, kRight = 160, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#000000", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

void axes(std::ofstream& out, const Frame& f, const std::string& title, const std::string& xl,
          const std::string& yl, bool x_ticks) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << esc(title)
      << "</text>\n";
  const double xa = kLeft, xb = kWidth - kRight, ya = kTop, yb = kHeight - kBottom;
  out << "<rect x=\"" << xa << "\" y=\"" << ya << "\" width=\"" << xb - xa << "\" height=\"" << yb - ya
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    out << "<text x=\"" << xa - 6 << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
        << "</text>\n";
    if (x_ticks) {
      const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
      out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << yb + 16 << "\" text-anchor=\"middle\">" << tick(xv)
          << "</text>\n";
    }
  }
  out << "<text x=\"" << (xa + xb) / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">" << esc(xl)
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (ya + yb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (ya + yb) / 2 << ")\">" << esc(yl) << "</text>\n";
}

}  // namespace

void write_svg_lines(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!(x1 > x0)) x1 = x0 + 1.0;
  pad(y0, y1);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  const Frame f{x0, x1, y0, y1};
  axes(out, f, title, x_label, y_label, true);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      out << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i])) << ' ';
    out << "\"/>\n";
    const double ly = kTop + 16 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kWidth - kRight + 30
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kWidth - kRight + 36 << "\" y=\"" << ly << "\">" << esc(s.name) << "</text>\n";
  }
  out << "</svg>\n";
}

void write_svg_bars(const std::filesystem::path& path, const std::string& title, const std::string& y_label,
                    const std::vector<Bar>& bars) {
  double y0 = 0.0, y1 = 0.0;
  for (const auto& b : bars) {
    y0 = std::min({y0, b.value, b.low});
    y1 = std::max({y1, b.value, b.high});
  }
  pad(y0, y1);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  const double n = static_cast<double>(std::max<std::size_t>(bars.size(), 1));
  const Frame f{0.0, n, y0, y1};
  axes(out, f, title, "", y_label, false);
  for (std::size_t k = 0; k < bars.size(); ++k) {
    const auto& b = bars[k];
    const double xl = f.px(static_cast<double>(k) + 0.2), xr = f.px(static_cast<double>(k) + 0.8);
    const double top = f.py(std::max(0.0, b.value)), bottom = f.py(std::min(0.0, b.value));
    out << "<rect x=\"" << num(xl) << "\" y=\"" << num(top) << "\" width=\"" << num(xr - xl) << "\" height=\""
        << num(bottom - top) << "\" fill=\"" << kColors[k % std::size(kColors)] << "\" fill-opacity=\"0.7\"/>\n";
    const double xm = 0.5 * (xl + xr);
    out << "<line x1=\"" << num(xm) << "\" y1=\"" << num(f.py(b.low)) << "\" x2=\"" << num(xm) << "\" y2=\""
        << num(f.py(b.high)) << "\" stroke=\"#333\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(xm) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
        << esc(b.label) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace sbe
