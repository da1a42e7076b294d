#include "needleperc/geometry.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

#include "needleperc/errors.h"

namespace needleperc::geometry {
namespace {

using Rational = boost::multiprecision::cpp_rational;

std::atomic<double> union_area_fault{0.0};

int Sign(double v) { return (v > 0) - (v < 0); }

int Orient2dExact(Vec2 a, Vec2 b, Vec2 c) {
  const Rational ax(a.x1), ay(a.x2), bx(b.x1), by(b.x2), cx(c.x1), cy(c.x2);
  const Rational det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx);
  return det.sign();
}

bool OnSegment(Vec2 p, const Segment& s) {
  return std::min(s.a.x1, s.b.x1) <= p.x1 && p.x1 <= std::max(s.a.x1, s.b.x1) &&
         std::min(s.a.x2, s.b.x2) <= p.x2 && p.x2 <= std::max(s.a.x2, s.b.x2);
}

struct Interval {
  double lo;
  double hi;
};

double MergedLength(std::vector<Interval>& intervals) {
  if (intervals.empty()) return 0.0;
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& l, const Interval& r) { return l.lo < r.lo; });
  double total = 0.0;
  double lo = intervals[0].lo;
  double hi = intervals[0].hi;
  for (std::size_t i = 1; i < intervals.size(); ++i) {
    if (intervals[i].lo > hi) {
      total += hi - lo;
      lo = intervals[i].lo;
      hi = intervals[i].hi;
    } else {
      hi = std::max(hi, intervals[i].hi);
    }
  }
  return total + (hi - lo);
}

struct Rect {
  double s0, s1, t0, t1;
};

// Slab sweep over the distinct s-edges; within a slab the covered t-length
// is constant.
double RectUnionArea(std::vector<Rect>& rects) {
  if (rects.empty()) return 0.0;
  if (rects.size() == 1) {
    return (rects[0].s1 - rects[0].s0) * (rects[0].t1 - rects[0].t0);
  }
  std::vector<double> xs;
  xs.reserve(2 * rects.size());
  for (const Rect& r : rects) {
    xs.push_back(r.s0);
    xs.push_back(r.s1);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<Interval> active;
  active.reserve(rects.size());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double x0 = xs[i];
    const double x1 = xs[i + 1];
    active.clear();
    for (const Rect& r : rects) {
      if (r.s0 <= x0 && x1 <= r.s1) active.push_back({r.t0, r.t1});
    }
    area += (x1 - x0) * MergedLength(active);
  }
  return area;
}

struct Edge {
  Vec2 p;
  Vec2 q;
  std::size_t poly;
};

// Vertical extent of a convex polygon on the line x = xm, where xm is
// strictly inside its x-range and differs from every vertex abscissa.
Interval CrossSection(const ConvexPolygon& poly, double xm) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly.vertices[i];
    const Vec2 q = poly.vertices[(i + 1) % n];
    if ((p.x1 < xm && xm < q.x1) || (q.x1 < xm && xm < p.x1)) {
      const double y = p.x2 + (xm - p.x1) * (q.x2 - p.x2) / (q.x1 - p.x1);
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
  }
  return {lo, hi};
}

double ApplyFault(double area) {
  const double bias = union_area_fault.load(std::memory_order_relaxed);
  return bias == 0.0 ? area : area * (1.0 + bias);
}

}  // namespace

double NormalizeAngle(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("angle must be finite");
  double t = std::fmod(theta, kPi);
  if (t < 0) t += kPi;
  if (t >= kPi) t = 0.0;
  return t;
}

Needle MakeNeedle(Vec2 center, double angle, double half_length) {
  if (!(half_length > 0) || !std::isfinite(half_length)) {
    throw std::invalid_argument("needle half-length must be positive");
  }
  if (!std::isfinite(center.x1) || !std::isfinite(center.x2)) {
    throw std::invalid_argument("needle center must be finite");
  }
  return {center, NormalizeAngle(angle), half_length};
}

Segment Endpoints(const Needle& s) {
  const Vec2 d = s.half_length * UnitVector(s.angle);
  return {s.center - d, s.center + d};
}

DirPair MakeDirPair(double alpha, double beta) {
  if (!(0.0 <= alpha && alpha < beta && beta < kPi)) {
    throw std::invalid_argument("direction pair needs 0 <= alpha < beta < pi");
  }
  return {alpha, beta};
}

double CAlphaBeta(DirPair dirs) {
  return std::sin(dirs.alpha) * std::sin(dirs.beta) * std::sin(dirs.beta - dirs.alpha);
}

double SkewBox::Area() const {
  if (Empty()) return 0.0;
  return 4.0 * half_a * half_b * std::sin(dirs.beta - dirs.alpha);
}

bool SkewBox::Contains(Vec2 x) const {
  if (Empty()) return false;
  const Vec2 st = SkewCoords(x - center, dirs);
  return std::abs(st.x1) <= half_a && std::abs(st.x2) <= half_b;
}

std::optional<SkewBox> ContactBox(const Needle& s, double phi, double radius) {
  const double theta = s.angle;
  phi = NormalizeAngle(phi);
  if (theta == phi) return std::nullopt;
  if (theta < phi) return SkewBox{s.center, {theta, phi}, s.half_length, radius};
  return SkewBox{s.center, {phi, theta}, radius, s.half_length};
}

double ConvexPolygon::Area() const {
  if (Empty()) return 0.0;
  double twice = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    twice += Cross(vertices[i], vertices[(i + 1) % n]);
  }
  return 0.5 * twice;
}

bool ConvexPolygon::Contains(Vec2 x) const {
  if (Empty()) return false;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (Cross(vertices[(i + 1) % n] - vertices[i], x - vertices[i]) < 0) return false;
  }
  return true;
}

HCoords ComputeHCoords(Vec2 x, DirPair dirs) {
  const double sa = std::sin(dirs.alpha);
  const double sb = std::sin(dirs.beta);
  if (sa == 0.0 || sb == 0.0) {
    throw DegenerateDirectionError("skew h-coordinates need sin(alpha) != 0");
  }
  const Vec2 st = SkewCoords(x, dirs);
  return {st.x1 / sb, st.x2 / sa, x.x2 / (sa * sb)};
}

Vec2 FromHCoords(double h_alpha, double h_beta, DirPair dirs) {
  return (h_alpha * std::sin(dirs.beta)) * UnitVector(dirs.alpha) +
         (h_beta * std::sin(dirs.alpha)) * UnitVector(dirs.beta);
}

Vec2 SkewCoords(Vec2 x, DirPair dirs) {
  const Vec2 ea = UnitVector(dirs.alpha);
  const Vec2 eb = UnitVector(dirs.beta);
  const double det = Cross(ea, eb);
  return {Cross(x, eb) / det, Cross(ea, x) / det};
}

int Orient2d(Vec2 a, Vec2 b, Vec2 c) {
  // Shewchuk's static filter; the exact path only runs near degeneracy.
  const double l = (a.x1 - c.x1) * (b.x2 - c.x2);
  const double r = (a.x2 - c.x2) * (b.x1 - c.x1);
  const double det = l - r;
  const double bound = (3.0 + 16.0 * std::numeric_limits<double>::epsilon()) *
                       std::numeric_limits<double>::epsilon() * (std::abs(l) + std::abs(r));
  if (std::abs(det) > bound) return Sign(det);
  return Orient2dExact(a, b, c);
}

bool SegmentsIntersect(const Segment& s, const Segment& t) {
  const int o1 = Orient2d(s.a, s.b, t.a);
  const int o2 = Orient2d(s.a, s.b, t.b);
  const int o3 = Orient2d(t.a, t.b, s.a);
  const int o4 = Orient2d(t.a, t.b, s.b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && OnSegment(t.a, s)) return true;
  if (o2 == 0 && OnSegment(t.b, s)) return true;
  if (o3 == 0 && OnSegment(s.a, t)) return true;
  if (o4 == 0 && OnSegment(s.b, t)) return true;
  return false;
}

bool NeedlesIntersect(const Needle& s1, const Needle& s2) {
  return SegmentsIntersect(Endpoints(s1), Endpoints(s2));
}

ConvexPolygon SkewBoxPolygon(const SkewBox& box) {
  if (box.Empty()) return {};
  const Vec2 a = box.half_a * UnitVector(box.dirs.alpha);
  const Vec2 b = box.half_b * UnitVector(box.dirs.beta);
  return {{box.center - a - b, box.center + a - b, box.center + a + b, box.center - a + b}};
}

double UnionArea(std::span<const ConvexPolygon> polys) {
  std::vector<const ConvexPolygon*> live;
  for (const ConvexPolygon& p : polys) {
    if (!p.Empty()) live.push_back(&p);
  }
  if (live.empty()) return 0.0;
  if (live.size() == 1) return ApplyFault(live[0]->Area());

  std::vector<double> xs;
  std::vector<Edge> edges;
  std::vector<Interval> xrange(live.size());
  for (std::size_t k = 0; k < live.size(); ++k) {
    const auto& v = live[k]->vertices;
    xrange[k] = {v[0].x1, v[0].x1};
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2 p = v[i];
      const Vec2 q = v[(i + 1) % v.size()];
      xs.push_back(p.x1);
      xrange[k].lo = std::min(xrange[k].lo, p.x1);
      xrange[k].hi = std::max(xrange[k].hi, p.x1);
      if (p.x1 != q.x1) edges.push_back({p, q, k});
    }
  }
  // Crossings of edges from different polygons are the only places where
  // the order of boundary lines inside a slab can change.
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    const double elo = std::min(e.p.x1, e.q.x1);
    const double ehi = std::max(e.p.x1, e.q.x1);
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      const Edge& f = edges[j];
      if (f.poly == e.poly) continue;
      if (std::max(f.p.x1, f.q.x1) <= elo || std::min(f.p.x1, f.q.x1) >= ehi) continue;
      const int o1 = Orient2d(e.p, e.q, f.p);
      const int o2 = Orient2d(e.p, e.q, f.q);
      if (o1 * o2 >= 0) continue;
      const int o3 = Orient2d(f.p, f.q, e.p);
      const int o4 = Orient2d(f.p, f.q, e.q);
      if (o3 * o4 >= 0) continue;
      const Vec2 r = e.q - e.p;
      const Vec2 s = f.q - f.p;
      const double t = Cross(f.p - e.p, s) / Cross(r, s);
      xs.push_back(e.p.x1 + t * r.x1);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  // Inside each slab the union length is affine in x, so the midpoint rule
  // integrates it exactly.
  std::vector<Interval> sections;
  sections.reserve(live.size());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double x0 = xs[i];
    const double x1 = xs[i + 1];
    const double xm = 0.5 * (x0 + x1);
    if (!(x0 < xm && xm < x1)) continue;
    sections.clear();
    for (std::size_t k = 0; k < live.size(); ++k) {
      if (xrange[k].lo < xm && xm < xrange[k].hi) {
        sections.push_back(CrossSection(*live[k], xm));
      }
    }
    area += (x1 - x0) * MergedLength(sections);
  }
  return ApplyFault(area);
}

double UnionAreaSameDirs(DirPair dirs, double half_a, double half_b,
                         std::span<const Vec2> centers) {
  if (centers.empty()) throw std::invalid_argument("union of zero boxes requested");
  if (half_a <= 0.0 || half_b <= 0.0) return 0.0;
  std::vector<Rect> rects;
  rects.reserve(centers.size());
  for (const Vec2& c : centers) {
    const Vec2 st = SkewCoords(c, dirs);
    rects.push_back({st.x1 - half_a, st.x1 + half_a, st.x2 - half_b, st.x2 + half_b});
  }
  return RectUnionArea(rects) * std::sin(dirs.beta - dirs.alpha);
}

double UnionAreaOfBoxes(std::span<const SkewBox> boxes) {
  std::vector<const SkewBox*> live;
  for (const SkewBox& b : boxes) {
    if (!b.Empty()) live.push_back(&b);
  }
  if (live.empty()) return 0.0;
  const DirPair d = live[0]->dirs;
  const bool same = std::all_of(live.begin(), live.end(), [&](const SkewBox* b) {
    return b->dirs.alpha == d.alpha && b->dirs.beta == d.beta;
  });
  if (same) {
    std::vector<Rect> rects;
    rects.reserve(live.size());
    for (const SkewBox* b : live) {
      const Vec2 st = SkewCoords(b->center, d);
      rects.push_back({st.x1 - b->half_a, st.x1 + b->half_a, st.x2 - b->half_b,
                       st.x2 + b->half_b});
    }
    return RectUnionArea(rects) * std::sin(d.beta - d.alpha);
  }
  std::vector<ConvexPolygon> polys;
  polys.reserve(live.size());
  for (const SkewBox* b : live) polys.push_back(SkewBoxPolygon(*b));
  return UnionArea(polys);
}

AreaEstimate RasterAreaOracle(std::span<const ConvexPolygon> polys,
                              std::int64_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("raster oracle needs samples >= 1");
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  bool any = false;
  for (const ConvexPolygon& p : polys) {
    if (p.Empty()) continue;
    any = true;
    for (const Vec2& v : p.vertices) {
      xlo = std::min(xlo, v.x1);
      xhi = std::max(xhi, v.x1);
      ylo = std::min(ylo, v.x2);
      yhi = std::max(yhi, v.x2);
    }
  }
  if (!any) return {0.0, 0.0};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(xlo, xhi);
  std::uniform_real_distribution<double> uy(ylo, yhi);
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const Vec2 x{ux(rng), uy(rng)};
    for (const ConvexPolygon& p : polys) {
      if (p.Contains(x)) {
        ++hits;
        break;
      }
    }
  }
  const double box = (xhi - xlo) * (yhi - ylo);
  const double f = static_cast<double>(hits) / static_cast<double>(samples);
  return {box * f, box * std::sqrt(f * (1.0 - f) / static_cast<double>(samples))};
}

double MaxSpread(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("spread of an empty sequence");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

double ConvexHullArea(std::span<const Vec2> points) {
  if (points.size() < 3) return 0.0;
  std::vector<Vec2> p(points.begin(), points.end());
  std::sort(p.begin(), p.end(), [](Vec2 a, Vec2 b) {
    return a.x1 < b.x1 || (a.x1 == b.x1 && a.x2 < b.x2);
  });
  std::vector<Vec2> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && Orient2d(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && Orient2d(hull[k - 2], hull[k - 1], p[i - 1]) <= 0) --k;
    hull[k++] = p[i - 1];
  }
  hull.resize(k > 0 ? k - 1 : 0);
  return ConvexPolygon{hull}.Area();
}

namespace testing {
void SetUnionAreaFault(double bias) { union_area_fault.store(bias); }
}  // namespace testing

}  // namespace needleperc::geometry
