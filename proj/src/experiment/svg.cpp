#include "tsnl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace tsnl {

namespace {

constexpr double kW = 640.0, kH = 480.0;
constexpr double kLeft = 70.0, kRight = 620.0, kTop = 50.0, kBottom = 430.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b"};

struct Scale {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double map(double v, double p0, double p1) const {
    double x = log ? std::log10(v) : v;
    double a = log ? std::log10(lo) : lo;
    double b = log ? std::log10(hi) : hi;
    if (b - a < 1e-300) return 0.5 * (p0 + p1);
    return p0 + (x - a) / (b - a) * (p1 - p0);
  }
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series, bool log_x,
                      bool log_y) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (log_x && x <= 0.0) continue;
      if (log_y && y <= 0.0) continue;
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  if (!std::isfinite(xlo)) {
    xlo = log_x ? 1.0 : 0.0;
    xhi = log_x ? 10.0 : 1.0;
  }
  if (!std::isfinite(ylo)) {
    ylo = log_y ? 1.0 : 0.0;
    yhi = log_y ? 10.0 : 1.0;
  }
  if (xlo == xhi) {
    xlo = log_x ? xlo / 2 : xlo - 1;
    xhi = log_x ? xhi * 2 : xhi + 1;
  }
  if (ylo == yhi) {
    ylo = log_y ? ylo / 2 : ylo - 1;
    yhi = log_y ? yhi * 2 : yhi + 1;
  }
  const Scale sx{xlo, xhi, log_x};
  const Scale sy{ylo, yhi, log_y};

  std::ofstream os(path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kW << ' '
     << kH << "\">\n";
  os << "<rect width=\"" << kW << "\" height=\"" << kH
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"28\" text-anchor=\"middle\" "
     << "font-size=\"16\">" << title << "</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
     << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
     << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kH - 12
     << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
  os << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
     << (kTop + kBottom) / 2 << ")\">" << ylabel << "</text>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = xlo * (1 - i / 4.0) + xhi * (i / 4.0);
    const double fy = ylo * (1 - i / 4.0) + yhi * (i / 4.0);
    const double vx = log_x ? std::pow(10.0, std::log10(xlo) * (1 - i / 4.0) +
                                                 std::log10(xhi) * (i / 4.0))
                            : fx;
    const double vy = log_y ? std::pow(10.0, std::log10(ylo) * (1 - i / 4.0) +
                                                 std::log10(yhi) * (i / 4.0))
                            : fy;
    const double px = kLeft + (kRight - kLeft) * i / 4.0;
    const double py = kBottom - (kBottom - kTop) * i / 4.0;
    os << "<text x=\"" << px << "\" y=\"" << kBottom + 18
       << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(vx)
       << "</text>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << py + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(vy) << "</text>\n";
  }

  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kColors[si % 6];
    std::ostringstream pts;
    for (const auto& [x, y] : series[si].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if ((log_x && x <= 0.0) || (log_y && y <= 0.0)) continue;
      pts << sx.map(x, kLeft, kRight) << ',' << sy.map(y, kBottom, kTop) << ' ';
    }
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n";
    for (const auto& [x, y] : series[si].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if ((log_x && x <= 0.0) || (log_y && y <= 0.0)) continue;
      os << "<circle cx=\"" << sx.map(x, kLeft, kRight) << "\" cy=\""
         << sy.map(y, kBottom, kTop) << "\" r=\"3\" fill=\"" << color
         << "\"/>\n";
    }
    os << "<text x=\"" << kRight - 6 << "\" y=\"" << kTop + 18 + 16 * si
       << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">"
       << series[si].label << "</text>\n";
  }
  os << "</svg>\n";
}

void write_bar_chart(const std::string& path, const std::string& title,
                     const std::vector<double>& heights, double reference) {
  const int n = static_cast<int>(heights.size());
  double hmax = reference;
  for (double h : heights) hmax = std::max(hmax, h);
  if (hmax <= 0.0) hmax = 1.0;

  std::ofstream os(path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kW << ' '
     << kH << "\">\n";
  os << "<rect width=\"" << kW << "\" height=\"" << kH
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"28\" text-anchor=\"middle\" "
     << "font-size=\"16\">" << title << "</text>\n";
  const double span = (kRight - kLeft) / std::max(1, n);
  for (int i = 0; i < n; ++i) {
    const double h = heights[i] / hmax * (kBottom - kTop);
    os << "<rect x=\"" << kLeft + i * span + 2 << "\" y=\"" << kBottom - h
       << "\" width=\"" << span - 4 << "\" height=\"" << h
       << "\" fill=\"#1f77b4\"/>\n";
    os << "<text x=\"" << kLeft + (i + 0.5) * span << "\" y=\"" << kBottom + 16
       << "\" text-anchor=\"middle\" font-size=\"11\">" << i << "</text>\n";
  }
  const double ry = kBottom - reference / hmax * (kBottom - kTop);
  os << "<line x1=\"" << kLeft << "\" y1=\"" << ry << "\" x2=\"" << kRight
     << "\" y2=\"" << ry
     << "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
     << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n";
  os << "</svg>\n";
}

}  // namespace tsnl
