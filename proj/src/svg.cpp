#include "isomat/svg.hpp"

#include "isomat/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace isomat {

namespace {

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  const double nice = r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

}  // namespace

int freedman_diaconis_bins(const std::vector<double>& values, int floor_bins) {
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  if (v.size() < 4) return floor_bins;
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  const double iqr = q(0.75) - q(0.25);
  const double span = v.back() - v.front();
  if (!(iqr > 0.0) || !(span > 0.0)) return floor_bins;
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(v.size()));
  const double n = std::ceil(span / width);
  return std::max(floor_bins, static_cast<int>(std::min(n, 400.0)));
}

SvgPlot::SvgPlot(std::string title, std::string xlabel, std::string ylabel, int width, int height)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)), width_(width), height_(height) {}

void SvgPlot::histogram(const std::vector<double>& values, int bins, const std::string& color) {
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  if (v.empty()) return;
  if (bins <= 0) bins = freedman_diaconis_bins(v);
  auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  double lo = *mn, hi = *mx;
  if (fixed_x_) {
    lo = x0_;
    hi = x1_;
  }
  if (!(hi > lo)) hi = lo + 1.0;
  Bars b{lo, (hi - lo) / bins, std::vector<double>(static_cast<std::size_t>(bins), 0.0), color};
  std::size_t used = 0;
  for (double x : v) {
    if (x < lo || x > hi) continue;
    auto k = static_cast<std::size_t>((x - lo) / b.width);
    if (k >= b.heights.size()) k = b.heights.size() - 1;
    b.heights[k] += 1.0;
    ++used;
  }
  for (double& h : b.heights) h /= static_cast<double>(v.size()) * b.width;
  (void)used;
  bars_.push_back(std::move(b));
}

void SvgPlot::line(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
                   const std::string& label) {
  if (x.size() != y.size()) throw InvalidArgument("SvgPlot::line: x and y differ in length");
  series_.push_back({x, y, color, label, false, 0.0});
}

void SvgPlot::scatter(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
                      double radius) {
  if (x.size() != y.size()) throw InvalidArgument("SvgPlot::scatter: x and y differ in length");
  series_.push_back({x, y, color, "", true, radius});
}

void SvgPlot::set_xrange(double lo, double hi) {
  fixed_x_ = true;
  x0_ = lo;
  x1_ = hi;
}

void SvgPlot::set_yrange(double lo, double hi) {
  fixed_y_ = true;
  y0_ = lo;
  y1_ = hi;
}

std::string SvgPlot::render() const {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  auto take = [](double v, double& lo, double& hi) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (const auto& b : bars_) {
    take(b.x0, xlo, xhi);
    take(b.x0 + b.width * static_cast<double>(b.heights.size()), xlo, xhi);
    take(0.0, ylo, yhi);
    for (double h : b.heights) take(h, ylo, yhi);
  }
  for (const auto& s : series_) {
    for (double x : s.x) take(x, xlo, xhi);
    for (double y : s.y) take(y, ylo, yhi);
  }
  if (fixed_x_) {
    xlo = x0_;
    xhi = x1_;
  }
  if (fixed_y_) {
    ylo = y0_;
    yhi = y1_;
  }
  if (!std::isfinite(xlo)) xlo = 0.0, xhi = 1.0;
  if (!std::isfinite(ylo)) ylo = 0.0, yhi = 1.0;
  if (!(xhi > xlo)) xhi = xlo + 1.0;
  if (!(yhi > ylo)) yhi = ylo + 1.0;
  if (!fixed_y_) yhi += 0.05 * (yhi - ylo);

  const double left = 70, right = 20, top = 40, bottom = 55;
  const double pw = width_ - left - right, ph = height_ - top - bottom;
  auto px = [&](double x) { return left + (x - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double y) { return top + ph - (y - ylo) / (yhi - ylo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width_ / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title_)
    << "</text>\n";
  o << "<clipPath id=\"plot\"><rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw)
    << "\" height=\"" << fmt(ph) << "\"/></clipPath>\n";
  o << "<g clip-path=\"url(#plot)\">\n";
  for (const auto& b : bars_) {
    for (std::size_t k = 0; k < b.heights.size(); ++k) {
      const double x = b.x0 + b.width * static_cast<double>(k);
      const double y = py(b.heights[k]);
      o << "<rect x=\"" << fmt(px(x)) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(px(x + b.width) - px(x))
        << "\" height=\"" << fmt(py(0.0) - y) << "\" fill=\"" << b.color
        << "\" fill-opacity=\"0.6\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
    }
  }
  for (const auto& s : series_) {
    if (s.points) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        o << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i])) << "\" r=\"" << fmt(s.radius)
          << "\" fill=\"" << s.color << "\" fill-opacity=\"0.5\"/>\n";
      }
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        o << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
      }
      o << "\"/>\n";
    }
  }
  o << "</g>\n";

  // axes and ticks
  o << "<g stroke=\"black\" stroke-width=\"1\">\n";
  o << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(left + pw) << "\" y2=\""
    << fmt(top + ph) << "\"/>\n";
  o << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left) << "\" y2=\"" << fmt(top + ph)
    << "\"/>\n</g>\n";
  const double xs = nice_step(xhi - xlo, 6), ys = nice_step(yhi - ylo, 5);
  for (double t = std::ceil(xlo / xs) * xs; t <= xhi + 1e-9 * xs; t += xs) {
    o << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(px(t)) << "\" y2=\""
      << fmt(top + ph + 5) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(px(t)) << "\" y=\"" << fmt(top + ph + 18) << "\" text-anchor=\"middle\">"
      << fmt(std::abs(t) < 1e-12 * xs ? 0.0 : t, "%g") << "</text>\n";
  }
  for (double t = std::ceil(ylo / ys) * ys; t <= yhi + 1e-9 * ys; t += ys) {
    o << "<line x1=\"" << fmt(left - 5) << "\" y1=\"" << fmt(py(t)) << "\" x2=\"" << fmt(left) << "\" y2=\""
      << fmt(py(t)) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(py(t) + 4) << "\" text-anchor=\"end\">"
      << fmt(std::abs(t) < 1e-12 * ys ? 0.0 : t, "%g") << "</text>\n";
  }
  o << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << height_ - 12 << "\" text-anchor=\"middle\">"
    << escape(xlabel_) << "</text>\n";
  o << "<text x=\"16\" y=\"" << fmt(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << fmt(top + ph / 2) << ")\">" << escape(ylabel_) << "</text>\n";
  int legend = 0;
  for (const auto& s : series_) {
    if (s.label.empty()) continue;
    const double ly = top + 14 + 16 * legend++;
    o << "<line x1=\"" << fmt(left + pw - 150) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(left + pw - 130)
      << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << fmt(left + pw - 125) << "\" y=\"" << fmt(ly) << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void SvgPlot::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << render();
}

}  // namespace isomat
