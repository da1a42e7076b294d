#include "needleperc/formulas.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "needleperc/errors.h"

namespace needleperc::formulas {
namespace {

using geometry::ComputeHCoords;
using geometry::ConvexPolygon;
using geometry::HCoords;
using geometry::kPi;
using geometry::SkewBox;
using geometry::SkewBoxPolygon;

double Sq(double v) { return v * v; }
double Pos(double v) { return v > 0.0 ? v : 0.0; }
int Sgn(double v) { return (v > 0) - (v < 0); }

bool Close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

double LogSumExp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

struct HView {
  double h0, ha, hb;
};

HView Hs(const ThreeStateParams& p) {
  return {p.r0 / std::sin(p.beta - p.alpha), p.r_alpha / std::sin(p.beta),
          p.r_beta / std::sin(p.alpha)};
}

// Reflection x -> (-x1, x2) composed with the alpha <-> beta swap.
ThreeStateParams Reflect(const ThreeStateParams& p) {
  ThreeStateParams q = p;
  q.alpha = kPi - p.beta;
  q.beta = kPi - p.alpha;
  q.r_alpha = p.r_beta;
  q.r_beta = p.r_alpha;
  q.p_alpha = p.p_beta;
  q.p_beta = p.p_alpha;
  return q;
}

// Rotation that puts orientation `zero` at angle 0. roles[i] is the original
// orientation now playing role i.
ThreeStateParams RotateToZero(const ThreeStateParams& p, Orientation zero,
                              std::array<Orientation, 3>* roles) {
  using O = Orientation;
  ThreeStateParams q = p;
  std::array<O, 3> r{O::kZero, O::kAlpha, O::kBeta};
  if (zero == O::kAlpha) {
    q.alpha = p.beta - p.alpha;
    q.beta = kPi - p.alpha;
    q.r0 = p.r_alpha;
    q.r_alpha = p.r_beta;
    q.r_beta = p.r0;
    q.p0 = p.p_alpha;
    q.p_alpha = p.p_beta;
    q.p_beta = p.p0;
    r = {O::kAlpha, O::kBeta, O::kZero};
  } else if (zero == O::kBeta) {
    q.alpha = kPi - p.beta;
    q.beta = kPi - p.beta + p.alpha;
    q.r0 = p.r_beta;
    q.r_alpha = p.r0;
    q.r_beta = p.r_alpha;
    q.p0 = p.p_beta;
    q.p_alpha = p.p0;
    q.p_beta = p.p_alpha;
    r = {O::kBeta, O::kZero, O::kAlpha};
  }
  if (roles != nullptr) *roles = r;
  return q;
}

double HOf(const HView& h, Orientation o) {
  switch (o) {
    case Orientation::kZero: return h.h0;
    case Orientation::kAlpha: return h.ha;
    case Orientation::kBeta: return h.hb;
  }
  return 0.0;
}

double POf(const ThreeStateParams& p, Orientation o) {
  switch (o) {
    case Orientation::kZero: return p.p0;
    case Orientation::kAlpha: return p.p_alpha;
    case Orientation::kBeta: return p.p_beta;
  }
  return 0.0;
}

std::array<Orientation, 2> Others(Orientation x) {
  using O = Orientation;
  switch (x) {
    case O::kZero: return {O::kAlpha, O::kBeta};
    case O::kAlpha: return {O::kZero, O::kBeta};
    case O::kBeta: return {O::kZero, O::kAlpha};
  }
  return {O::kAlpha, O::kBeta};
}

// u(H_x; H_y, H_z): normalized area of the union of the two x-contact boxes.
double UnionRate(double hx, double hy, double hz) {
  const double lo = std::min(hy, hz);
  const double hi = std::max(hy, hz);
  if (lo > 2.0 * hx) return hx * (hy + hz - hx);
  return hx * hi + 0.25 * lo * lo;
}

double RateFromH(double px, double hx, double hy, double hz) {
  return px * UnionRate(hx, hy, hz) + (1.0 - px) * hy * hz;
}

SkewBox BoxAt(Vec2 c, double dir, double half_zero, double half_dir) {
  return SkewBox{c, DirPair{0.0, dir}, half_zero, half_dir};
}

// |union of B^{0,dir}_{a,b}(c_i)| - |B^{0,dir}_{a,b}|.
double SameDirExcess(double dir, double a, double b, std::span<const Vec2> centers) {
  if (a <= 0.0 || b <= 0.0) return 0.0;
  return geometry::UnionAreaSameDirs(DirPair{0.0, dir}, a, b, centers) -
         4.0 * a * b * std::sin(dir);
}

struct Spreads {
  double ma = 0.0, mb = 0.0, m0 = 0.0;
};

Spreads SpreadsOf(std::span<const Vec2> pts, DirPair dirs) {
  std::vector<double> a, b, s;
  for (const Vec2& v : pts) {
    const HCoords h = ComputeHCoords(v, dirs);
    a.push_back(h.h_alpha);
    b.push_back(h.h_beta);
    s.push_back(h.h_bar0);
  }
  return {geometry::MaxSpread(a), geometry::MaxSpread(b), geometry::MaxSpread(s)};
}

void CheckConfigs(std::span<const Vec2> xs, std::span<const Vec2> ys) {
  if (xs.empty() || ys.empty()) throw std::invalid_argument("empty configuration");
  if (!(xs.back() == Vec2{}) || !(ys.back() == Vec2{})) {
    throw std::invalid_argument("last center of each configuration must be the origin");
  }
}

}  // namespace

double MarkLaw::MaxHalfLength() const {
  double r = 0.0;
  for (const auto& e : entries) r = std::max(r, e.half_length);
  return r;
}

int MarkLaw::IndexOfAngle(double angle) const {
  const double a = geometry::NormalizeAngle(angle);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (std::fabs(entries[i].angle - a) <= 1e-12) return static_cast<int>(i);
  }
  return -1;
}

MarkLaw MakeMarkLaw(std::vector<MarkEntry> entries) {
  if (entries.empty()) throw std::invalid_argument("mark law needs at least one entry");
  double total = 0.0;
  for (auto& e : entries) {
    if (!(e.half_length > 0.0)) throw std::invalid_argument("half-lengths must be positive");
    if (!(e.prob >= 0.0)) throw std::invalid_argument("probabilities must be non-negative");
    e.angle = geometry::NormalizeAngle(e.angle);
    total += e.prob;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("mark probabilities must sum to 1");
  }
  std::sort(entries.begin(), entries.end(),
            [](const MarkEntry& a, const MarkEntry& b) { return a.angle < b.angle; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].angle == entries[i - 1].angle) {
      throw std::invalid_argument("mark angles must be distinct");
    }
  }
  return MarkLaw{std::move(entries)};
}

void Validate(const TwoStateParams& params) {
  if (!(params.alpha > 0.0 && params.alpha < kPi)) {
    throw std::invalid_argument("alpha must lie in (0, pi)");
  }
  if (!(params.r0 > 0.0 && params.r_alpha > 0.0)) {
    throw std::invalid_argument("half-lengths must be positive");
  }
  if (!(params.p > 0.0 && params.p < 1.0)) throw std::invalid_argument("p must lie in (0, 1)");
}

MarkLaw ToMarkLaw(const TwoStateParams& params) {
  Validate(params);
  return MakeMarkLaw({{0.0, params.r0, params.p},
                      {params.alpha, params.r_alpha, 1.0 - params.p}});
}

double ContactArea(const TwoStateParams& params) {
  return 4.0 * params.r0 * params.r_alpha * std::sin(params.alpha);
}

void Validate(const ThreeStateParams& params) {
  if (!(0.0 < params.alpha && params.alpha < params.beta && params.beta < kPi)) {
    throw std::invalid_argument("angles must satisfy 0 < alpha < beta < pi");
  }
  if (!(params.r0 > 0.0 && params.r_alpha > 0.0 && params.r_beta > 0.0)) {
    throw std::invalid_argument("half-lengths must be positive");
  }
  if (!(params.p0 >= 0.0 && params.p_alpha >= 0.0 && params.p_beta >= 0.0)) {
    throw std::invalid_argument("probabilities must be non-negative");
  }
  if (std::fabs(params.p0 + params.p_alpha + params.p_beta - 1.0) > 1e-12) {
    throw std::invalid_argument("probabilities must sum to 1");
  }
}

MarkLaw ToMarkLaw(const ThreeStateParams& params) {
  Validate(params);
  return MakeMarkLaw({{0.0, params.r0, params.p0},
                      {params.alpha, params.r_alpha, params.p_alpha},
                      {params.beta, params.r_beta, params.p_beta}});
}

ParamsH DeriveH(const ThreeStateParams& params) {
  const HView h = Hs(params);
  ParamsH out;
  out.c = geometry::CAlphaBeta(params.dirs());
  out.h0 = h.h0;
  out.h_alpha = h.ha;
  out.h_beta = h.hb;
  out.a = h.ha / h.h0;
  out.b = h.hb / h.h0;
  return out;
}

ThreeStateParams FromH(double alpha, double beta, double h0, double h_alpha, double h_beta,
                       double p0, double p_alpha, double p_beta) {
  ThreeStateParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.r0 = h0 * std::sin(beta - alpha);
  p.r_alpha = h_alpha * std::sin(beta);
  p.r_beta = h_beta * std::sin(alpha);
  p.p0 = p0;
  p.p_alpha = p_alpha;
  p.p_beta = p_beta;
  return p;
}

std::string ToString(Orientation o) {
  switch (o) {
    case Orientation::kZero: return "0";
    case Orientation::kAlpha: return "alpha";
    case Orientation::kBeta: return "beta";
  }
  return "?";
}

double UnionAreaLemma41(double h0, double h_alpha, double h_beta, double c) {
  return 4.0 * c * UnionRate(h0, h_alpha, h_beta);
}

double BaseUnionAreaGeometric(const ThreeStateParams& params) {
  const std::array<ConvexPolygon, 2> polys{
      SkewBoxPolygon(BoxAt({}, params.alpha, params.r0, params.r_alpha)),
      SkewBoxPolygon(BoxAt({}, params.beta, params.r0, params.r_beta))};
  return geometry::UnionArea(polys);
}

double DeltaXGeometric(Vec2 x, const ThreeStateParams& params) {
  const std::array<ConvexPolygon, 2> polys{
      SkewBoxPolygon(BoxAt({}, params.alpha, params.r0, params.r_alpha)),
      SkewBoxPolygon(BoxAt(x, params.beta, params.r0, params.r_beta))};
  const double c = geometry::CAlphaBeta(params.dirs());
  return (geometry::UnionArea(polys) - BaseUnionAreaGeometric(params)) / c;
}

std::string ToString(DeltaCase c) {
  switch (c) {
    case DeltaCase::kI: return "i";
    case DeltaCase::kIIa: return "ii-a";
    case DeltaCase::kIIb: return "ii-b";
    case DeltaCase::kIIc: return "ii-c";
    case DeltaCase::kIId: return "ii-d";
    case DeltaCase::kOutside: return "outside";
  }
  return "?";
}

DeltaCase ClassifyDeltaCase(Vec2 x, const ThreeStateParams& params) {
  HView h = Hs(params);
  ThreeStateParams p = params;
  if (h.hb > h.ha) {
    p = Reflect(params);
    x = {x.x1, -x.x2};
    h = Hs(p);
  }
  const HCoords hc = ComputeHCoords(x, p.dirs());
  if (std::fabs(hc.h_alpha) > h.ha || std::fabs(hc.h_beta) > h.hb) return DeltaCase::kOutside;
  if (2.0 * h.h0 < h.hb) return DeltaCase::kI;
  const double d = h.ha - h.hb;
  const double w = 2.0 * h.h0 - h.hb;
  if (std::fabs(hc.h_bar0) <= d) return DeltaCase::kIIa;
  if (std::fabs(hc.h_beta) <= w) return DeltaCase::kIIb;
  return hc.h_bar0 * hc.h_beta > 0.0 ? DeltaCase::kIIc : DeltaCase::kIId;
}

double DeltaX(Vec2 x, const ThreeStateParams& params) {
  HView h = Hs(params);
  ThreeStateParams p = params;
  if (h.hb > h.ha) {
    p = Reflect(params);
    x = {x.x1, -x.x2};
    h = Hs(p);
  }
  const HCoords hc = ComputeHCoords(x, p.dirs());
  const double ha = hc.h_alpha;
  const double hb = hc.h_beta;
  const double h0 = hc.h_bar0;
  if (std::fabs(ha) > h.ha || std::fabs(hb) > h.hb) return DeltaXGeometric(x, p);

  if (2.0 * h.h0 < h.hb) {
    const double m1 = std::max({-ha + 2.0 * h.h0 - h.ha, hb + 2.0 * h.h0 - h.hb, 0.0});
    const double m2 = std::max({ha + 2.0 * h.h0 - h.ha, -hb + 2.0 * h.h0 - h.hb, 0.0});
    return 0.5 * (m1 * m1 + m2 * m2);
  }
  const double d = h.ha - h.hb;
  const double w = 2.0 * h.h0 - h.hb;
  const double e = std::fabs(h0) - d;
  const double abs_hb = std::fabs(hb);
  if (e <= 0.0) {
    if (abs_hb <= w) return hb * hb;
    return hb * hb - 0.5 * Sq(abs_hb - w);
  }
  if (abs_hb <= w) return hb * hb + 0.5 * e * e + (w - Sgn(h0) * hb) * e;
  if (h0 * hb > 0.0) {
    return hb * hb - 0.5 * Sq(abs_hb - w) + 0.5 * Sq(Pos(2.0 * h.h0 - h.ha + Sgn(hb) * ha));
  }
  return hb * hb - 0.5 * Sq(abs_hb - w) + e * (w + abs_hb + 0.5 * e);
}

HalfLengths ZeroSetHalfLengths(const ThreeStateParams& params) {
  const HView h = Hs(params);
  const double sa = std::sin(params.alpha);
  const double sb = std::sin(params.beta);
  if (2.0 * h.h0 < h.ha && 2.0 * h.h0 < h.hb) {
    return {params.r_alpha - 2.0 * h.h0 * sb, params.r_beta - 2.0 * h.h0 * sa};
  }
  return {Pos(params.r_alpha - h.hb * sb), Pos(params.r_beta - h.ha * sa)};
}

Lemma31Bounds Lemma31(DirPair dirs, double h_alpha, double h_beta,
                      std::span<const double> h_a, std::span<const double> h_b) {
  const double c = geometry::CAlphaBeta(dirs);
  const double ma = geometry::MaxSpread(h_a);
  const double mb = geometry::MaxSpread(h_b);
  Lemma31Bounds out;
  out.lower1 = c * (h_alpha * mb + h_beta * ma);
  out.upper = 2.0 * out.lower1 + c * ma * mb;
  out.lower2 = out.upper - 2.0 * c * ma * mb;
  return out;
}

Lemma31Bounds Lemma31Skew(DirPair dirs, double r_alpha, double r_beta,
                          std::span<const Vec2> centers) {
  std::vector<double> s, t;
  for (const Vec2& v : centers) {
    const Vec2 st = geometry::SkewCoords(v, dirs);
    s.push_back(st.x1);
    t.push_back(st.x2);
  }
  const double ms = geometry::MaxSpread(s);
  const double mt = geometry::MaxSpread(t);
  const double sn = std::sin(dirs.beta - dirs.alpha);
  Lemma31Bounds out;
  out.lower1 = sn * (r_beta * ms + r_alpha * mt);
  out.upper = 2.0 * out.lower1 + sn * ms * mt;
  out.lower2 = out.upper - 2.0 * sn * ms * mt;
  return out;
}

double DeltaPairGeometric(std::span<const Vec2> xs, std::span<const Vec2> ys, Vec2 u,
                          const ThreeStateParams& params) {
  CheckConfigs(xs, ys);
  std::vector<ConvexPolygon> polys;
  for (const Vec2& x : xs) {
    polys.push_back(SkewBoxPolygon(BoxAt(x, params.alpha, params.r0, params.r_alpha)));
  }
  for (const Vec2& y : ys) {
    polys.push_back(SkewBoxPolygon(BoxAt(y + u, params.beta, params.r0, params.r_beta)));
  }
  const std::array<ConvexPolygon, 2> base{
      SkewBoxPolygon(BoxAt({}, params.alpha, params.r0, params.r_alpha)),
      SkewBoxPolygon(BoxAt(u, params.beta, params.r0, params.r_beta))};
  const double c = geometry::CAlphaBeta(params.dirs());
  return (geometry::UnionArea(polys) - geometry::UnionArea(base)) / c;
}

Bounds Lemma43(LemmaCase which, std::span<const Vec2> xs, std::span<const Vec2> ys,
               const ThreeStateParams& params) {
  CheckConfigs(xs, ys);
  const HView h = Hs(params);
  const DirPair dirs = params.dirs();
  const double c = geometry::CAlphaBeta(dirs);
  const double sa = std::sin(params.alpha);
  const double sb = std::sin(params.beta);
  const double sd = std::sin(params.beta - params.alpha);
  const Spreads sx = SpreadsOf(xs, dirs);
  const Spreads sy = SpreadsOf(ys, dirs);

  Bounds out;
  switch (which) {
    case LemmaCase::kI: {
      if (!(2.0 * h.h0 < h.ha && 2.0 * h.h0 < h.hb)) {
        throw HypothesisError("case (i) needs 2 H0 < H_alpha, H_beta");
      }
      if (!(sx.ma + sy.ma < h.ha - 2.0 * h.h0 && sx.mb + sy.mb < h.hb - 2.0 * h.h0)) {
        throw HypothesisError("case (i) spread condition fails");
      }
      const double ex = SameDirExcess(params.alpha, params.r0, params.r_alpha - h.h0 * sb, xs);
      const double ey = SameDirExcess(params.beta, params.r0, params.r_beta - h.h0 * sa, ys);
      out.upper = (ex + ey) / c;
      out.lower = out.upper - sy.ma * sx.mb;
      break;
    }
    case LemmaCase::kII: {
      if (!(2.0 * h.h0 >= std::min(h.ha, h.hb) && h.ha > h.hb)) {
        throw HypothesisError("case (ii) needs 2 H0 >= min(H) and H_alpha > H_beta");
      }
      if (!(sx.ma + sy.ma < h.ha - h.hb && sx.mb + sy.mb < h.hb)) {
        throw HypothesisError("case (ii) spread condition fails");
      }
      const double ex =
          SameDirExcess(params.alpha, params.r0, params.r_alpha - 0.5 * h.hb * sb, xs);
      const double ey =
          SameDirExcess(params.beta, 0.5 * h.hb * sd, 0.5 * params.r_beta, ys);
      const double base = (ex + ey) / c;
      out.upper = base + 0.5 * sx.mb * sx.mb + 0.5 * sy.ma * sy.ma;
      out.lower = base - sx.mb * sy.mb - sx.mb * sy.ma - sx.mb * sx.mb - sy.ma * sy.ma;
      break;
    }
    case LemmaCase::kIII: {
      if (!(Close(h.ha, h.hb, 1e-9) && 2.0 * h.h0 >= h.ha)) {
        throw HypothesisError("case (iii) needs 2 H0 >= H_alpha = H_beta");
      }
      if (!(sx.ma + sy.ma < h.ha && sx.mb + sy.mb < h.hb)) {
        throw HypothesisError("case (iii) spread condition fails");
      }
      std::vector<double> all0;
      for (const Vec2& v : xs) all0.push_back(ComputeHCoords(v, dirs).h_bar0);
      for (const Vec2& v : ys) all0.push_back(ComputeHCoords(v, dirs).h_bar0);
      const double m0 = geometry::MaxSpread(all0);
      const double ex =
          SameDirExcess(params.alpha, 0.5 * h.ha * sd, 0.5 * params.r_alpha, xs);
      const double ey =
          SameDirExcess(params.beta, 0.5 * h.hb * sd, 0.5 * params.r_beta, ys);
      const double base = (ex + ey) / c + (2.0 * h.h0 - h.hb) * m0;
      out.upper = base + 0.5 * sx.mb * sx.mb + 0.5 * sy.ma * sy.ma;
      out.lower = base - 0.5 * m0 * m0 - std::min(sx.m0, sy.m0) * (sx.mb + sy.ma);
      break;
    }
  }
  return out;
}

bool Lemma44Check(LemmaCase which, std::span<const Vec2> xs, std::span<const Vec2> ys,
                  Vec2 u, const ThreeStateParams& params, double tol) {
  CheckConfigs(xs, ys);
  const HView h = Hs(params);
  const DirPair dirs = params.dirs();
  const Spreads sx = SpreadsOf(xs, dirs);
  const Spreads sy = SpreadsOf(ys, dirs);
  const HCoords hu = ComputeHCoords(u, dirs);
  const double ua = std::fabs(hu.h_alpha);
  const double ub = std::fabs(hu.h_beta);
  const double slack = tol * Sq(h.h0 + h.ha + h.hb);

  switch (which) {
    case LemmaCase::kI:
      if (!(2.0 * h.h0 < h.ha && 2.0 * h.h0 < h.hb)) {
        throw HypothesisError("case (i) needs 2 H0 < H_alpha, H_beta");
      }
      if (!(sx.ma + sy.ma + ua < h.ha - 2.0 * h.h0 &&
            sx.mb + sy.mb + ub < h.hb - 2.0 * h.h0)) {
        throw HypothesisError("case (i) spread condition fails");
      }
      break;
    case LemmaCase::kII:
      if (!(2.0 * h.h0 >= std::min(h.ha, h.hb) && h.ha > h.hb)) {
        throw HypothesisError("case (ii) needs 2 H0 >= min(H) and H_alpha > H_beta");
      }
      if (!(sx.ma + sy.ma + ua < h.ha - h.hb && sx.mb + sy.mb + ub < h.hb)) {
        throw HypothesisError("case (ii) spread condition fails");
      }
      break;
    case LemmaCase::kIII:
      if (!(Close(h.ha, h.hb, 1e-9) && 2.0 * h.h0 >= h.ha)) {
        throw HypothesisError("case (iii) needs 2 H0 >= H_alpha = H_beta");
      }
      if (!(sx.ma + sy.ma + ua < h.ha && sx.mb + sy.mb + ub < h.hb)) {
        throw HypothesisError("case (iii) spread condition fails");
      }
      break;
  }

  const double d0 = DeltaPairGeometric(xs, ys, {}, params);
  const double du = DeltaPairGeometric(xs, ys, u, params);
  if (which == LemmaCase::kI) return std::fabs(du - d0) <= slack;
  if (which == LemmaCase::kII) return std::fabs(du - d0) <= Sq(hu.h_beta) + slack;

  std::vector<double> shifted, plain;
  for (const Vec2& v : xs) {
    const double s = ComputeHCoords(v, dirs).h_bar0;
    shifted.push_back(s);
    plain.push_back(s);
  }
  for (const Vec2& v : ys) {
    plain.push_back(ComputeHCoords(v, dirs).h_bar0);
    shifted.push_back(ComputeHCoords(v + u, dirs).h_bar0);
  }
  const double jump = geometry::MaxSpread(shifted) - std::fabs(hu.h_bar0) - geometry::MaxSpread(plain);
  const double lhs = std::fabs(du - d0 - (2.0 * h.h0 - h.hb) * jump);
  const double rhs = Sq(hu.h_alpha) + Sq(hu.h_beta) +
                     std::fabs(jump) * (sx.ma + sy.ma + ua + sx.mb + sy.mb + ub);
  return lhs <= rhs + slack;
}

double RateExponent(const ThreeStateParams& params, Orientation absent) {
  const HView h = Hs(params);
  const auto [y, z] = Others(absent);
  return RateFromH(POf(params, absent), HOf(h, absent), HOf(h, y), HOf(h, z));
}

double PhiP(const ThreeStateParams& params, Orientation absent) {
  return 4.0 * geometry::CAlphaBeta(params.dirs()) * RateExponent(params, absent);
}

double ThresholdL1(double p0, double p_alpha, double p_beta) {
  const double mn = std::min(p_alpha, p_beta);
  return 1.0 - (p0 - mn) / (4.0 - 3.0 * p0 - mn);
}

double ThresholdL2(double p0, double p_alpha, double p_beta) {
  const double mx = std::max(p_alpha, p_beta);
  const double mn = std::min(p_alpha, p_beta);
  return (2.0 * mx + std::sqrt(4.0 * mx * mx + 4.0 * p_alpha * p_beta + p0 * mn)) /
         (4.0 * mx + p0);
}

std::string DirectClauseLabel(double a, double b, double p0, double p_alpha, double p_beta,
                              double tie_tol) {
  auto eq = [&](double u, double v) { return Close(u, v, tie_tol); };
  const double mn = std::min(a, b);
  const double pmin = std::min(p_alpha, p_beta);

  if (a >= 2.0 && b >= 2.0) {
    const double lhs = (a * b - a + 0.25) * p_beta + a;
    const double rhs = (a * b - b + 0.25) * p_alpha + b;
    if (eq(lhs, rhs)) return "1iii";
    return lhs < rhs ? "1i" : "1ii";
  }
  if (eq(a, b)) {
    if (eq(a, 1.0)) {
      std::array<double, 3> p{p0, p_alpha, p_beta};
      std::sort(p.begin(), p.end());
      if (eq(p[0], p[2])) return "5iii";
      if (eq(p[0], p[1])) return "5ii";
      return "5i";
    }
    if (a < 1.0) {
      if (p0 <= pmin || eq(p0, pmin)) return "3i";
      return a < ThresholdL1(p0, p_alpha, p_beta) ? "3ii-fix" : "3ii-nofix";
    }
    if (a < 2.0) {
      if (p0 < pmin && !eq(p0, pmin)) {
        return a < ThresholdL2(p0, p_alpha, p_beta) ? "4i-fix" : "4i-nofix";
      }
      return "4ii";
    }
  }
  if (0.5 < mn && mn < 2.0 && !eq(a, 1.0) && !eq(b, 1.0)) {
    // f takes the absent orientation first; see RateExponent.
    const double f0 = RateFromH(p0, 1.0, a, b);
    const double fa = RateFromH(p_alpha, a, 1.0, b);
    const double fb = RateFromH(p_beta, b, 1.0, a);
    if (f0 < std::min(fa, fb) && !eq(f0, std::min(fa, fb))) return "2i";
    if (eq(fa, fb)) {
      if (eq(fa, f0)) return "2iii";
      if (fa < f0) return "2ii";
    }
    return "2-unstated";
  }
  return "";
}

RegimeVerdict ClassifyRegime(const ThreeStateParams& params, double tie_tol) {
  Validate(params);
  using O = Orientation;
  const HView h = Hs(params);
  RegimeVerdict v;
  const std::array<O, 3> all{O::kZero, O::kAlpha, O::kBeta};
  for (O x : all) v.rates[static_cast<int>(x)] = RateExponent(params, x);
  const double best = *std::min_element(v.rates.begin(), v.rates.end());

  bool any_fix_fail = false;
  for (O x : all) {
    const double r = v.rates[static_cast<int>(x)];
    if (r - best > tie_tol * std::max(1.0, std::fabs(best))) continue;
    const auto [y, z] = Others(x);
    v.survivors.emplace_back(y, z);
    const double hy = HOf(h, y);
    const double hz = HOf(h, z);
    const double hx = HOf(h, x);
    const bool small = std::min(hy, hz) <= 2.0 * hx * (1.0 + tie_tol);
    const bool equal = Close(hy, hz, tie_tol);
    if (!(equal && small)) any_fix_fail = true;
    if (!equal && small) v.pinned_one_coordinate = true;
  }
  std::sort(v.survivors.begin(), v.survivors.end());
  v.fixation = !any_fix_fail;

  const std::string direct = DirectClauseLabel(h.ha / h.h0, h.hb / h.h0, params.p0,
                                               params.p_alpha, params.p_beta, tie_tol);
  if (!direct.empty()) {
    v.case_label = direct;
    return v;
  }
  std::array<O, 3> perm = all;
  do {
    const double h0 = HOf(h, perm[0]);
    const std::string lbl =
        DirectClauseLabel(HOf(h, perm[1]) / h0, HOf(h, perm[2]) / h0, POf(params, perm[0]),
                          POf(params, perm[1]), POf(params, perm[2]), tie_tol);
    if (!lbl.empty()) {
      v.case_label = "reduced";
      v.reduced_label = lbl;
      v.roles = perm;
      return v;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  v.case_label = "reduced";
  v.reduced_label = "unmatched";
  return v;
}

double GammaK(double c1, double c2, double c3, std::span<const Vec2> u) {
  if (u.size() <= 1) return 1.0;
  std::vector<double> a, b, s;
  for (const Vec2& v : u) {
    a.push_back(v.x1);
    b.push_back(v.x2);
    s.push_back(v.x1 + v.x2);
  }
  return std::exp(-(c1 * geometry::MaxSpread(a) + c2 * geometry::MaxSpread(b) + c3 * geometry::MaxSpread(s)));
}

McEstimate GK(double c1, double c2, double c3, int k, std::int64_t budget,
              std::uint64_t seed, bool force_mc) {
  if (!(c1 > 0.0 && c2 > 0.0)) throw std::invalid_argument("G^k needs c1, c2 > 0");
  if (!(c3 >= 0.0)) throw std::invalid_argument("G^k needs c3 >= 0");
  if (k < 1) throw std::invalid_argument("G^k needs k >= 1");
  if (k == 1) return {1.0, 0.0};
  if (c3 == 0.0 && !force_mc) return {std::pow(c1 * c2, -(k - 1)), 0.0};
  if (budget < 2) throw std::invalid_argument("G^k Monte Carlo needs budget >= 2");

  // The integral is invariant under permutations of (c1, c2, c3) (unimodular
  // changes of variable), so the two largest weights drive the proposal.
  std::array<double, 3> c{c1, c2, c3};
  if (!force_mc) std::sort(c.begin(), c.end(), std::greater<>());
  constexpr double kKappa = 0.75;
  const double r1 = kKappa * c[0];
  const double r2 = kKappa * c[1];

  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> spread1(k - 1, 1.0 / r1);
  std::gamma_distribution<double> spread2(k - 1, 1.0 / r2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> a(k), b(k);

  // Shape of k points with prescribed spread s, translated so the last is 0.
  auto draw = [&](std::vector<double>& pts, double s) {
    for (auto& v : pts) v = unif(rng);
    const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end());
    const double mn = *lo;
    const double rg = *hi - *lo;
    const double last = (pts.back() - mn) / rg;
    for (auto& v : pts) v = ((v - mn) / rg - last) * s;
  };

  double sum = 0.0, sum2 = 0.0;
  for (std::int64_t i = 0; i < budget; ++i) {
    const double s1 = spread1(rng);
    const double s2 = spread2(rng);
    draw(a, s1);
    draw(b, s2);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int j = 0; j < k; ++j) {
      lo = std::min(lo, a[j] + b[j]);
      hi = std::max(hi, a[j] + b[j]);
    }
    const double w = std::exp(-(c[0] - r1) * s1 - (c[1] - r2) * s2 - c[2] * (hi - lo));
    sum += w;
    sum2 += w * w;
  }
  const double n = static_cast<double>(budget);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum2 / n - mean * mean) * n / (n - 1.0));
  const double scale = std::pow(r1 * r2, -(k - 1));
  return {mean * scale, std::sqrt(var / n) * scale};
}

double Thm21LogClusterProb(int k, int l, double lambda, const TwoStateParams& params) {
  Validate(params);
  if (k < 1 || l < 1) throw std::invalid_argument("k and l must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const double m = k + l;
  const double p = params.p;
  const double q = params.q();
  const double lb = lambda * ContactArea(params);
  return -(m - 3.0) * std::log(lb) - lb - 2.0 * (m - 1.0) * std::log(p * q) + std::log(m) +
         3.0 * k * std::log(p) + std::lgamma(k + 1.0) + 3.0 * l * std::log(q) +
         std::lgamma(l + 1.0);
}

double Thm21ClusterProb(int k, int l, double lambda, const TwoStateParams& params) {
  return std::exp(Thm21LogClusterProb(k, l, lambda, params));
}

namespace {
double CompositionLogWeight(int k, int l, double p) {
  return 3.0 * k * std::log(p) + std::lgamma(k + 1.0) + 3.0 * l * std::log1p(-p) +
         std::lgamma(l + 1.0);
}
}  // namespace

double Thm21LogCompositionLimit(int m, int k, double p) {
  if (m < 2) throw std::invalid_argument("m must be >= 2");
  if (k < 1 || k > m - 1) throw std::invalid_argument("k must lie in [1, m - 1]");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0, 1)");
  std::vector<double> lw;
  for (int j = 1; j < m; ++j) lw.push_back(CompositionLogWeight(j, m - j, p));
  return CompositionLogWeight(k, m - k, p) - LogSumExp(lw);
}

CompositionLaw Thm21CompositionLimit(int m, double p) {
  if (m < 2) throw std::invalid_argument("m must be >= 2");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0, 1)");
  std::vector<double> lw;
  for (int j = 1; j < m; ++j) lw.push_back(CompositionLogWeight(j, m - j, p));
  const double z = LogSumExp(lw);
  CompositionLaw law;
  law.m = m;
  for (int j = 1; j < m; ++j) law.weights[{j, m - j}] = std::exp(lw[j - 1] - z);
  return law;
}

double EntropyH(double s, double p) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("s must lie in [0, 1]");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0, 1)");
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  const double q = 1.0 - p;
  double h = xlogx(s) + xlogx(1.0 - s);
  if (p > q) h += 3.0 * (1.0 - s) * std::log(q / p);
  if (p < q) h += 3.0 * s * std::log(p / q);
  return h;
}

PrefactorResult Thm22Prefactor(const ThreeStateParams& params, std::array<int, 3> kvec,
                               double lambda, std::int64_t budget, std::uint64_t seed) {
  Validate(params);
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  int zeros = 0;
  int absent_idx = -1;
  for (int i = 0; i < 3; ++i) {
    if (kvec[i] < 0) throw std::invalid_argument("composition entries must be >= 0");
    if (kvec[i] == 0) {
      ++zeros;
      absent_idx = i;
    }
  }
  if (zeros != 1) throw std::invalid_argument("composition needs exactly one zero entry");

  const Orientation absent = static_cast<Orientation>(absent_idx);
  std::array<Orientation, 3> roles{};
  ThreeStateParams p = RotateToZero(params, absent, &roles);
  int ka = kvec[static_cast<int>(roles[1])];
  int kb = kvec[static_cast<int>(roles[2])];
  HView h = Hs(p);
  if (!(p.p0 > 0.0 && p.p_alpha > 0.0 && p.p_beta > 0.0)) {
    throw std::invalid_argument("prefactor needs every probability positive");
  }

  constexpr double kTol = 1e-9;
  const bool eq_ab = Close(h.ha, h.hb, kTol);
  AsymptoticCase regime;
  if (2.0 * h.h0 < h.ha && 2.0 * h.h0 < h.hb && !Close(2.0 * h.h0, std::min(h.ha, h.hb), kTol)) {
    regime = AsymptoticCase::kOne;
  } else if (eq_ab && Close(h.ha, 2.0 * h.h0, kTol)) {
    regime = AsymptoticCase::kThree;
  } else if (eq_ab) {
    throw UnsupportedRegimeError("2 H0 > H_alpha = H_beta has no closed form here");
  } else {
    regime = AsymptoticCase::kTwo;
    if (h.hb > h.ha) {
      p = Reflect(p);
      std::swap(ka, kb);
      h = Hs(p);
    }
  }

  const double c = geometry::CAlphaBeta(p.dirs());
  const double m = ka + kb;
  const double p0 = p.p0, pa = p.p_alpha, pb = p.p_beta;
  const double h0 = h.h0, ha = h.ha, hb = h.hb;

  std::array<double, 3> ga{}, gb{};
  double log_front = 0.0;
  switch (regime) {
    case AsymptoticCase::kOne:
      ga = {pb * hb, pb * ha + p0 * (ha - h0), p0 * h0};
      gb = {pa * hb + p0 * (hb - h0), pa * ha, p0 * h0};
      log_front = -(m - 3.0) * std::log(4.0 * c * lambda) + std::log(ha - 2.0 * h0) +
                  std::log(hb - 2.0 * h0);
      break;
    case AsymptoticCase::kTwo:
      ga = {pb * hb, pb * ha + p0 * (ha - 0.5 * hb), p0 * h0};
      gb = {pa * hb + 0.5 * p0 * hb, pa * ha, 0.5 * p0 * hb};
      log_front = -(m - 2.5) * std::log(4.0 * c * lambda) + std::log(ha - hb) +
                  0.5 * std::log(kPi / p0);
      break;
    case AsymptoticCase::kThree:
      ga = {2.0 * pb * h0, (2.0 * pb + p0) * h0, p0 * h0};
      gb = {(2.0 * pa + p0) * h0, 2.0 * pa * h0, p0 * h0};
      log_front = -(m - 2.0) * std::log(4.0 * c * lambda) + std::log((kPi + 4.0) / p0);
      break;
  }

  auto g = [&](const std::array<double, 3>& cs, int k, std::uint64_t s) {
    std::array<double, 3> sorted = cs;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return GK(sorted[0], sorted[1], sorted[2], k, budget, s);
  };
  const McEstimate g_alpha = g(ga, ka, seed);
  const McEstimate g_beta = g(gb, kb, seed + 0x9e3779b97f4a7c15ULL);

  PrefactorResult out;
  out.regime = regime;
  out.phi = PhiP(params, absent);
  out.log_value = -lambda * out.phi + log_front + std::log(m) + ka * std::log(pa) +
                  std::lgamma(ka + 1.0) + std::log(g_alpha.value) + kb * std::log(pb) +
                  std::lgamma(kb + 1.0) + std::log(g_beta.value);
  out.value = std::exp(out.log_value);
  out.log_rel_std = std::hypot(g_alpha.std_error / g_alpha.value,
                               g_beta.std_error / g_beta.value);
  return out;
}

}  // namespace needleperc::formulas
