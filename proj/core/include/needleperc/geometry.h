#ifndef NEEDLEPERC_GEOMETRY_H_
#define NEEDLEPERC_GEOMETRY_H_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace needleperc::geometry {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
  friend Vec2 operator-(Vec2 a) { return {-a.x1, -a.x2}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x1, s * a.x2}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double Dot(Vec2 a, Vec2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double Cross(Vec2 a, Vec2 b) { return a.x1 * b.x2 - a.x2 * b.x1; }

// e_theta = (cos theta, sin theta).
inline Vec2 UnitVector(double theta) { return {std::cos(theta), std::sin(theta)}; }

// Maps any angle to [0, pi); a needle and its reversal are the same set.
double NormalizeAngle(double theta);

// S(x, theta, r) = {x + u e_theta : u in [-r, r]}.
struct Needle {
  Vec2 center;
  double angle = 0.0;
  double half_length = 0.0;
};

// Validates r > 0 and normalizes the angle.
Needle MakeNeedle(Vec2 center, double angle, double half_length);

struct Segment {
  Vec2 a;
  Vec2 b;
};
Segment Endpoints(const Needle& s);

// 0 <= alpha < beta < pi.
struct DirPair {
  double alpha = 0.0;
  double beta = kPi / 2;
};
DirPair MakeDirPair(double alpha, double beta);

// sin(alpha) sin(beta) sin(beta - alpha); positive whenever alpha > 0.
double CAlphaBeta(DirPair dirs);

// B^{alpha,beta}_{halfA,halfB}(center) =
//   center + {s e_alpha + t e_beta : |s| <= halfA, |t| <= halfB}.
struct SkewBox {
  Vec2 center;
  DirPair dirs;
  double half_a = 0.0;
  double half_b = 0.0;

  double Area() const;
  bool Empty() const { return half_a <= 0.0 || half_b <= 0.0; }
  // Closed membership test in the box's own skew frame.
  bool Contains(Vec2 x) const;
};

// Centers of (phi, R)-needles that touch the given needle. Parallel needles
// meet only on a null set, so that case has no box.
std::optional<SkewBox> ContactBox(const Needle& s, double phi, double radius);

struct ConvexPolygon {
  std::vector<Vec2> vertices;  // counter-clockwise; empty means the empty set

  bool Empty() const { return vertices.size() < 3; }
  double Area() const;
  bool Contains(Vec2 x) const;
};

struct HCoords {
  double h_alpha = 0.0;
  double h_beta = 0.0;
  double h_bar0 = 0.0;
};

// (h_alpha, h_beta) solve x = h_alpha sin(beta) e_alpha + h_beta sin(alpha)
// e_beta, and h_bar0 = x2 / (sin alpha sin beta). Throws
// DegenerateDirectionError when sin(alpha) == 0.
HCoords ComputeHCoords(Vec2 x, DirPair dirs);

// Inverse of ComputeHCoords on its first two components.
Vec2 FromHCoords(double h_alpha, double h_beta, DirPair dirs);

// Coordinates (s, t) with x = s e_alpha + t e_beta; defined for alpha = 0.
Vec2 SkewCoords(Vec2 x, DirPair dirs);

// Sign of the orientation determinant of (a, b, c), evaluated exactly.
int Orient2d(Vec2 a, Vec2 b, Vec2 c);

// Closed segments sharing at least one point, decided by exact predicates.
bool SegmentsIntersect(const Segment& s, const Segment& t);
bool NeedlesIntersect(const Needle& s1, const Needle& s2);

ConvexPolygon SkewBoxPolygon(const SkewBox& box);

double UnionArea(std::span<const ConvexPolygon> polys);
double UnionAreaSameDirs(DirPair dirs, double half_a, double half_b,
                         std::span<const Vec2> centers);
// Union of skew boxes; boxes sharing one direction pair take the
// rectangle-sweep path, mixed pairs the polygon path.
double UnionAreaOfBoxes(std::span<const SkewBox> boxes);

struct AreaEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};
AreaEstimate RasterAreaOracle(std::span<const ConvexPolygon> polys,
                              std::int64_t samples, std::uint64_t seed);

double MaxSpread(std::span<const double> values);

double ConvexHullArea(std::span<const Vec2> points);

namespace testing {
// Multiplies every UnionArea result by (1 + bias). Used by the self-test to
// prove that a broken kernel is detected; zero restores normal behaviour.
void SetUnionAreaFault(double bias);
}  // namespace testing

}  // namespace needleperc::geometry

#endif  // NEEDLEPERC_GEOMETRY_H_
