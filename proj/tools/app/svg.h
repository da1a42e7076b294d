#ifndef NEEDLEPERC_APP_SVG_H_
#define NEEDLEPERC_APP_SVG_H_

#include <string>
#include <utility>
#include <vector>

namespace needleperc::app {

// Self-contained SVG text; coordinates are printed with three decimals.
class Svg {
 public:
  Svg(double width, double height);

  void Rect(double x, double y, double w, double h, const std::string& fill);
  void Line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0, bool dashed = false, const std::string& cls = "");
  void Polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double width = 1.5);
  void Circle(double x, double y, double r, const std::string& fill);
  void Text(double x, double y, const std::string& text, double size = 12.0,
            const std::string& anchor = "middle");
  std::string str() const;

 private:
  double width_, height_;
  std::string body_;
};

// Axes box with data-to-pixel mapping.
class Plot {
 public:
  Plot(double x_min, double x_max, double y_min, double y_max, double width = 640,
       double height = 480);

  void Axes(const std::string& title, const std::string& x_label, const std::string& y_label,
            int ticks = 5);
  void Series(const std::vector<std::pair<double, double>>& pts, const std::string& stroke);
  void Points(const std::vector<std::pair<double, double>>& pts, const std::string& fill);
  void ErrorBar(double x, double lo, double hi, const std::string& stroke);
  void HLine(double y, const std::string& stroke);
  // Filled data-space rectangle [x0, x1] x [y0, y1].
  void Cell(double x0, double x1, double y0, double y1, const std::string& fill);
  void Segment(double x0, double y0, double x1, double y1, const std::string& stroke,
               double width = 1.0, const std::string& cls = "");
  void Curve(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
             double width);
  void Legend(const std::vector<std::pair<std::string, std::string>>& entries);

  double X(double x) const;
  double Y(double y) const;
  std::string str() const { return svg_.str(); }

 private:
  double x_min_, x_max_, y_min_, y_max_, width_, height_;
  double left_ = 70, right_ = 20, top_ = 40, bottom_ = 55;
  Svg svg_;
};

// Fixed palette used for categorical colors.
const std::string& PaletteColor(std::size_t i);

}  // namespace needleperc::app

#endif  // NEEDLEPERC_APP_SVG_H_
