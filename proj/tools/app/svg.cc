#include "svg.h"

#include <algorithm>
#include <cstdio>

namespace needleperc::app {
namespace {

std::string F(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Tick(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

Svg::Svg(double width, double height) : width_(width), height_(height) {}

void Svg::Rect(double x, double y, double w, double h, const std::string& fill) {
  body_ += "<rect x=\"" + F(x) + "\" y=\"" + F(y) + "\" width=\"" + F(w) + "\" height=\"" +
           F(h) + "\" fill=\"" + fill + "\"/>\n";
}

void Svg::Line(double x1, double y1, double x2, double y2, const std::string& stroke,
               double width, bool dashed, const std::string& cls) {
  body_ += "<line ";
  if (!cls.empty()) body_ += "class=\"" + cls + "\" ";
  body_ += "x1=\"" + F(x1) + "\" y1=\"" + F(y1) + "\" x2=\"" + F(x2) + "\" y2=\"" +
           F(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + F(width) + "\"" +
           (dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
}

void Svg::Polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                   double width) {
  if (pts.empty()) return;
  body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + F(width) +
           "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) body_ += ' ';
    body_ += F(pts[i].first) + "," + F(pts[i].second);
  }
  body_ += "\"/>\n";
}

void Svg::Circle(double x, double y, double r, const std::string& fill) {
  body_ += "<circle cx=\"" + F(x) + "\" cy=\"" + F(y) + "\" r=\"" + F(r) + "\" fill=\"" +
           fill + "\"/>\n";
}

void Svg::Text(double x, double y, const std::string& text, double size,
               const std::string& anchor) {
  body_ += "<text x=\"" + F(x) + "\" y=\"" + F(y) + "\" font-size=\"" + F(size) +
           "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\">" + Escape(text) +
           "</text>\n";
}

std::string Svg::str() const {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + F(width_) + "\" height=\"" +
         F(height_) + "\" viewBox=\"0 0 " + F(width_) + " " + F(height_) + "\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
}

Plot::Plot(double x_min, double x_max, double y_min, double y_max, double width, double height)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), width_(width),
      height_(height), svg_(width, height) {
  if (x_max_ <= x_min_) x_max_ = x_min_ + 1.0;
  if (y_max_ <= y_min_) y_max_ = y_min_ + 1.0;
}

double Plot::X(double x) const {
  return left_ + (x - x_min_) / (x_max_ - x_min_) * (width_ - left_ - right_);
}

double Plot::Y(double y) const {
  return height_ - bottom_ - (y - y_min_) / (y_max_ - y_min_) * (height_ - top_ - bottom_);
}

void Plot::Axes(const std::string& title, const std::string& x_label,
                const std::string& y_label, int ticks) {
  const double x0 = X(x_min_), x1 = X(x_max_), y0 = Y(y_min_), y1 = Y(y_max_);
  svg_.Line(x0, y0, x1, y0, "black");
  svg_.Line(x0, y0, x0, y1, "black");
  for (int i = 0; i <= ticks; ++i) {
    const double xv = x_min_ + (x_max_ - x_min_) * i / ticks;
    const double yv = y_min_ + (y_max_ - y_min_) * i / ticks;
    svg_.Line(X(xv), y0, X(xv), y0 + 5, "black");
    svg_.Text(X(xv), y0 + 18, Tick(xv), 11);
    svg_.Line(x0 - 5, Y(yv), x0, Y(yv), "black");
    svg_.Text(x0 - 8, Y(yv) + 4, Tick(yv), 11, "end");
  }
  svg_.Text(width_ / 2, 24, title, 15);
  svg_.Text((x0 + x1) / 2, height_ - 12, x_label, 13);
  svg_.Text(16, (y0 + y1) / 2, y_label, 13, "start");
}

void Plot::Series(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
  std::vector<std::pair<double, double>> px;
  for (const auto& [x, y] : pts) px.emplace_back(X(x), Y(y));
  svg_.Polyline(px, stroke);
}

void Plot::Points(const std::vector<std::pair<double, double>>& pts, const std::string& fill) {
  for (const auto& [x, y] : pts) svg_.Circle(X(x), Y(y), 3.0, fill);
}

void Plot::ErrorBar(double x, double lo, double hi, const std::string& stroke) {
  svg_.Line(X(x), Y(lo), X(x), Y(hi), stroke);
  svg_.Line(X(x) - 3, Y(lo), X(x) + 3, Y(lo), stroke);
  svg_.Line(X(x) - 3, Y(hi), X(x) + 3, Y(hi), stroke);
}

void Plot::HLine(double y, const std::string& stroke) {
  svg_.Line(X(x_min_), Y(y), X(x_max_), Y(y), stroke, 1.0, true);
}

void Plot::Cell(double x0, double x1, double y0, double y1, const std::string& fill) {
  const double px = std::min(X(x0), X(x1)), py = std::min(Y(y0), Y(y1));
  svg_.Rect(px, py, std::abs(X(x1) - X(x0)), std::abs(Y(y1) - Y(y0)), fill);
}

void Plot::Segment(double x0, double y0, double x1, double y1, const std::string& stroke,
                   double width, const std::string& cls) {
  svg_.Line(X(x0), Y(y0), X(x1), Y(y1), stroke, width, false, cls);
}

void Plot::Curve(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                 double width) {
  std::vector<std::pair<double, double>> px;
  for (const auto& [x, y] : pts) px.emplace_back(X(x), Y(y));
  svg_.Polyline(px, stroke, width);
}

void Plot::Legend(const std::vector<std::pair<std::string, std::string>>& entries) {
  double y = top_ + 10;
  for (const auto& [label, color] : entries) {
    svg_.Rect(width_ - right_ - 150, y - 9, 10, 10, color);
    svg_.Text(width_ - right_ - 135, y, label, 11, "start");
    y += 16;
  }
}

const std::string& PaletteColor(std::size_t i) {
  static const std::vector<std::string> colors = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759",
                                                  "#76b7b2", "#edc948", "#b07aa1", "#9c755f"};
  return colors[i % colors.size()];
}

}  // namespace needleperc::app
