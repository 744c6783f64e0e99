#pragma once

#include <string>
#include <vector>

namespace isomat {

// Freedman-Diaconis bin count, never below `floor_bins`.
int freedman_diaconis_bins(const std::vector<double>& values, int floor_bins = 20);

// A small self-contained SVG plot: axes with ticks, histogram bars, polylines
// and scatter glyphs.  Output is byte-stable for equal input.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel, int width = 640, int height = 480);

  // Density-normalized histogram; bins <= 0 selects Freedman-Diaconis.
  void histogram(const std::vector<double>& values, int bins = 0, const std::string& color = "#4c72b0");
  void line(const std::vector<double>& x, const std::vector<double>& y, const std::string& color = "#c44e52",
            const std::string& label = "");
  void scatter(const std::vector<double>& x, const std::vector<double>& y, const std::string& color = "#4c72b0",
               double radius = 1.5);
  void set_xrange(double lo, double hi);
  void set_yrange(double lo, double hi);

  std::string render() const;
  void save(const std::string& path) const;

 private:
  struct Bars {
    double x0, width;
    std::vector<double> heights;
    std::string color;
  };
  struct Series {
    std::vector<double> x, y;
    std::string color, label;
    bool points;
    double radius;
  };

  std::string title_, xlabel_, ylabel_;
  int width_, height_;
  std::vector<Bars> bars_;
  std::vector<Series> series_;
  bool fixed_x_ = false, fixed_y_ = false;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
};

}  // namespace isomat
