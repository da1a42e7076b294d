#ifndef NEEDLEPERC_APP_CASES_H_
#define NEEDLEPERC_APP_CASES_H_

#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "needleperc/formulas.h"

namespace needleperc::app::cases {

using formulas::LemmaCase;
using formulas::Orientation;
using formulas::ThreeStateParams;
using geometry::Vec2;
using Rng = std::mt19937_64;

double Uniform(Rng& rng, double lo, double hi);

struct SameDirCase {
  geometry::DirPair dirs;
  double half_a = 0.0, half_b = 0.0;
  std::vector<Vec2> centers;
};
// Up to 8 boxes with overlapping and disjoint placements.
SameDirCase RandomSameDirs(Rng& rng);

// Boxes from a random walk whose steps stay inside the box, so the union is
// connected; the last center is the origin.
SameDirCase ConnectedSameDirs(Rng& rng);

// Angles in (0, pi) with gaps of at least 0.2 and half-lengths from H.
ThreeStateParams RandomAngles(Rng& rng, double h0, double ha, double hb, double p0, double pa,
                              double pb);

struct LemmaConfig {
  ThreeStateParams params;
  std::vector<Vec2> xs, ys;  // last entries at the origin
  Vec2 u;
};
// Parameters and configurations that satisfy the case's hypotheses by
// construction; u is zero unless with_shift is set.
LemmaConfig MakeLemmaConfig(Rng& rng, LemmaCase which, bool with_shift);

using Pair = std::pair<Orientation, Orientation>;

struct ClauseExpectation {
  std::string clause;
  std::set<Pair> survivors;
  std::optional<bool> fixation;  // only when the clause states it
};

// Conclusion of the explicit theorem clause whose hypothesis holds at
// (a, b, p), read clause by clause; nullopt when no clause applies.
std::optional<ClauseExpectation> ExpectedFromClauses(double a, double b, double p0, double pa,
                                                     double pb, double tol = 1e-9);

struct ClassifierPoint {
  double a = 1.0, b = 1.0, p0 = 0.0, pa = 0.0, pb = 0.0;
};
// Mixture that lands in every clause's hypothesis with positive frequency,
// including a = b, a = b = 1 and tied probabilities.
ClassifierPoint RandomClassifierPoint(Rng& rng);

}  // namespace needleperc::app::cases

#endif  // NEEDLEPERC_APP_CASES_H_
