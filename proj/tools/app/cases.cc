#include "cases.h"

#include <algorithm>
#include <cmath>

namespace needleperc::app::cases {
namespace {

constexpr double kPi = geometry::kPi;

// k points of [-t w, (1 - t) w] with the last one at 0.
std::vector<double> Spread(Rng& rng, int k, double w) {
  const double t = Uniform(rng, 0.0, 1.0);
  std::vector<double> v(k, 0.0);
  for (int i = 0; i + 1 < k; ++i) v[i] = Uniform(rng, -t * w, (1.0 - t) * w);
  return v;
}

std::vector<Vec2> Cloud(Rng& rng, int k, double wa, double wb, geometry::DirPair dirs) {
  const std::vector<double> ha = Spread(rng, k, wa);
  const std::vector<double> hb = Spread(rng, k, wb);
  std::vector<Vec2> out;
  for (int i = 0; i < k; ++i) out.push_back(geometry::FromHCoords(ha[i], hb[i], dirs));
  return out;
}

bool Eq(double x, double y, double tol) {
  return std::fabs(x - y) <= tol * std::max({1.0, std::fabs(x), std::fabs(y)});
}

double F(double px, double hx, double hy, double hz) {
  return px * hx * std::max(hy, hz) + px * std::min(hy, hz) * std::min(hy, hz) / 4.0 +
         (1.0 - px) * hy * hz;
}

}  // namespace

double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

SameDirCase RandomSameDirs(Rng& rng) {
  SameDirCase c;
  const double a = Uniform(rng, 0.0, kPi - 0.3);
  c.dirs = geometry::MakeDirPair(a, Uniform(rng, a + 0.15, kPi - 0.05));
  c.half_a = Uniform(rng, 0.1, 2.0);
  c.half_b = Uniform(rng, 0.1, 2.0);
  const int n = std::uniform_int_distribution<int>(1, 8)(rng);
  const double spread = Uniform(rng, 0.2, 4.0);
  for (int i = 0; i < n; ++i) {
    c.centers.push_back({Uniform(rng, -spread, spread), Uniform(rng, -spread, spread)});
  }
  return c;
}

SameDirCase ConnectedSameDirs(Rng& rng) {
  SameDirCase c;
  const double a = Uniform(rng, 0.0, kPi - 0.3);
  c.dirs = geometry::MakeDirPair(a, Uniform(rng, a + 0.15, kPi - 0.05));
  c.half_a = Uniform(rng, 0.2, 2.0);
  c.half_b = Uniform(rng, 0.2, 2.0);
  const int n = std::uniform_int_distribution<int>(2, 7)(rng);
  const geometry::Vec2 ea = geometry::UnitVector(c.dirs.alpha);
  const geometry::Vec2 eb = geometry::UnitVector(c.dirs.beta);
  std::vector<Vec2> walk{{0.0, 0.0}};
  for (int i = 1; i < n; ++i) {
    const double s = Uniform(rng, -1.9, 1.9) * c.half_a;
    const double t = Uniform(rng, -1.9, 1.9) * c.half_b;
    walk.push_back(walk.back() + s * ea + t * eb);
  }
  std::reverse(walk.begin(), walk.end());
  const Vec2 last = walk.back();
  for (Vec2& v : walk) v = v - last;
  c.centers = walk;
  return c;
}

ThreeStateParams RandomAngles(Rng& rng, double h0, double ha, double hb, double p0, double pa,
                              double pb) {
  const double alpha = Uniform(rng, 0.2, kPi - 0.4);
  const double beta = Uniform(rng, alpha + 0.2, kPi - 0.2);
  return formulas::FromH(alpha, beta, h0, ha, hb, p0, pa, pb);
}

LemmaConfig MakeLemmaConfig(Rng& rng, LemmaCase which, bool with_shift) {
  const double h0 = Uniform(rng, 0.5, 1.5);
  double ha = 0.0, hb = 0.0, budget_a = 0.0, budget_b = 0.0;
  switch (which) {
    case LemmaCase::kI:
      ha = h0 * Uniform(rng, 2.1, 4.0);
      hb = h0 * Uniform(rng, 2.1, 4.0);
      budget_a = ha - 2.0 * h0;
      budget_b = hb - 2.0 * h0;
      break;
    case LemmaCase::kII:
      hb = h0 * Uniform(rng, 0.3, 2.0);
      ha = hb + h0 * Uniform(rng, 0.2, 2.0);
      budget_a = ha - hb;
      budget_b = hb;
      break;
    case LemmaCase::kIII:
      ha = hb = h0 * Uniform(rng, 0.3, 2.0);
      budget_a = ha;
      budget_b = hb;
      break;
  }
  const double p0 = Uniform(rng, 0.1, 0.8);
  const double pa = (1.0 - p0) * Uniform(rng, 0.2, 0.8);
  LemmaConfig c;
  c.params = RandomAngles(rng, h0, ha, hb, p0, pa, 1.0 - p0 - pa);
  const geometry::DirPair dirs = c.params.dirs();
  // Split each budget between x, y and (optionally) u, keeping 2% slack.
  auto split = [&](double budget) {
    std::array<double, 3> w{Uniform(rng, 0.05, 1.0), Uniform(rng, 0.05, 1.0),
                            with_shift ? Uniform(rng, 0.05, 1.0) : 0.0};
    const double total = w[0] + w[1] + w[2];
    for (double& v : w) v *= 0.98 * budget / total;
    return w;
  };
  const std::array<double, 3> sa = split(budget_a);
  const std::array<double, 3> sb = split(budget_b);
  const int k = std::uniform_int_distribution<int>(1, 4)(rng);
  const int l = std::uniform_int_distribution<int>(1, 4)(rng);
  c.xs = Cloud(rng, k, sa[0], sb[0], dirs);
  c.ys = Cloud(rng, l, sa[1], sb[1], dirs);
  if (with_shift) {
    c.u = geometry::FromHCoords(Uniform(rng, -sa[2], sa[2]), Uniform(rng, -sb[2], sb[2]), dirs);
  }
  return c;
}

std::optional<ClauseExpectation> ExpectedFromClauses(double a, double b, double p0, double pa,
                                                     double pb, double tol) {
  using O = Orientation;
  const Pair k0a{O::kZero, O::kAlpha}, k0b{O::kZero, O::kBeta}, kab{O::kAlpha, O::kBeta};
  ClauseExpectation e;
  auto pick_larger = [&]() {
    if (Eq(pa, pb, tol)) {
      e.survivors = {k0a, k0b};
    } else {
      e.survivors = {pa > pb ? k0a : k0b};
    }
  };

  if (a >= 2.0 && b >= 2.0) {
    const double lhs = (a * b - a + 0.25) * pb + a;
    const double rhs = (a * b - b + 0.25) * pa + b;
    e.clause = "1";
    if (Eq(lhs, rhs, tol)) {
      e.survivors = {k0a, k0b};
    } else {
      e.survivors = {lhs < rhs ? k0a : k0b};
    }
    return e;
  }
  const double mn = std::min(a, b);
  if (mn > 0.5 && mn < 2.0 && !Eq(a, b, tol) && !Eq(a, 1.0, tol) && !Eq(b, 1.0, tol)) {
    const double f0 = F(p0, 1.0, a, b);
    const double fb = F(pb, b, 1.0, a);
    const double fa = F(pa, a, b, 1.0);
    e.clause = "2";
    if (f0 < std::min(fa, fb) && !Eq(f0, std::min(fa, fb), tol)) {
      e.survivors = {kab};
      return e;
    }
    if (Eq(fa, fb, tol) && Eq(fa, f0, tol)) {
      e.survivors = {k0a, k0b, kab};
      return e;
    }
    if (Eq(fa, fb, tol) && fa < f0) {
      e.survivors = {k0a, k0b};
      return e;
    }
    return std::nullopt;
  }
  if (!Eq(a, b, tol)) return std::nullopt;
  const double pmin = std::min(pa, pb);
  if (Eq(a, 1.0, tol)) {
    e.clause = "5";
    e.fixation = true;
    const std::array<double, 3> p{p0, pa, pb};
    const std::array<O, 3> o{O::kZero, O::kAlpha, O::kBeta};
    auto pair_without = [&](int z) {
      Pair q{o[(z + 1) % 3], o[(z + 2) % 3]};
      if (q.first > q.second) std::swap(q.first, q.second);
      return q;
    };
    if (Eq(p[0], p[1], tol) && Eq(p[1], p[2], tol)) {
      e.survivors = {k0a, k0b, kab};
      return e;
    }
    for (int z = 0; z < 3; ++z) {
      const int x = (z + 1) % 3, y = (z + 2) % 3;
      if (p[z] < std::min(p[x], p[y]) && !Eq(p[z], std::min(p[x], p[y]), tol)) {
        e.survivors = {pair_without(z)};
        return e;
      }
    }
    // Two equal minima below the third: the pairs containing the largest.
    for (int x = 0; x < 3; ++x) {
      const int y = (x + 1) % 3, z = (x + 2) % 3;
      if (Eq(p[y], p[z], tol) && p[y] < p[x]) {
        e.survivors = {pair_without(y), pair_without(z)};
        return e;
      }
    }
    return std::nullopt;
  }
  if (a > 0.0 && a < 1.0) {
    e.clause = "3";
    if (p0 <= pmin) {
      e.survivors = {kab};
      return e;
    }
    const double l1 = 1.0 - (p0 - pmin) / (4.0 - 3.0 * p0 - pmin);
    if (a < l1 && !Eq(a, l1, tol)) {
      e.survivors = {kab};
      e.fixation = true;
    } else {
      pick_larger();
    }
    return e;
  }
  if (a > 1.0 && a < 2.0) {
    e.clause = "4";
    const double pmax = std::max(pa, pb);
    if (p0 < pmin && !Eq(p0, pmin, tol)) {
      const double l2 =
          (2.0 * pmax + std::sqrt(4.0 * pmax * pmax + 4.0 * pa * pb + p0 * pmin)) /
          (4.0 * pmax + p0);
      if (a < l2 && !Eq(a, l2, tol)) {
        e.survivors = {kab};
        e.fixation = true;
        return e;
      }
    }
    pick_larger();
    return e;
  }
  return std::nullopt;
}

ClassifierPoint RandomClassifierPoint(Rng& rng) {
  ClassifierPoint c;
  const int kind = std::uniform_int_distribution<int>(0, 9)(rng);
  // Probabilities: random simplex point, sometimes with a tie.
  std::gamma_distribution<double> g(1.0, 1.0);
  double w0 = g(rng), wa = g(rng), wb = g(rng);
  const int tie = std::uniform_int_distribution<int>(0, 5)(rng);
  if (tie == 0) wa = wb;
  if (tie == 1) w0 = wa = wb;
  if (tie == 2) w0 = wa;
  const double s = w0 + wa + wb;
  c.p0 = w0 / s;
  c.pa = wa / s;
  c.pb = 1.0 - c.p0 - c.pa;
  if (tie == 0) c.pb = c.pa;
  if (tie == 1) c.p0 = c.pa = c.pb = 1.0 / 3.0;
  switch (kind) {
    case 0:
    case 1:
      c.a = Uniform(rng, 2.0, 6.0);
      c.b = Uniform(rng, 2.0, 6.0);
      break;
    case 2:
    case 3:
      c.a = Uniform(rng, 0.55, 1.95);
      c.b = Uniform(rng, 0.55, 4.0);
      if (std::uniform_int_distribution<int>(0, 1)(rng)) std::swap(c.a, c.b);
      break;
    case 4:
      c.a = c.b = Uniform(rng, 0.05, 1.0);
      break;
    case 5:
      c.a = c.b = Uniform(rng, 1.0, 2.0);
      break;
    case 6:
      c.a = c.b = 1.0;
      break;
    default:
      c.a = Uniform(rng, 0.05, 6.0);
      c.b = Uniform(rng, 0.05, 6.0);
  }
  return c;
}

}  // namespace needleperc::app::cases
