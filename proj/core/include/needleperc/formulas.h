#ifndef NEEDLEPERC_FORMULAS_H_
#define NEEDLEPERC_FORMULAS_H_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "needleperc/geometry.h"

namespace needleperc::formulas {

using geometry::DirPair;
using geometry::Vec2;

struct MarkEntry {
  double angle = 0.0;        // radians in [0, pi)
  double half_length = 0.0;  // R_j
  double prob = 0.0;         // p_j
};

// The orientation law rho: entries sorted by angle, distinct, sum of p = 1.
struct MarkLaw {
  std::vector<MarkEntry> entries;

  std::size_t size() const { return entries.size(); }
  double MaxHalfLength() const;
  // Index of the entry with exactly this angle, or -1.
  int IndexOfAngle(double angle) const;
};
MarkLaw MakeMarkLaw(std::vector<MarkEntry> entries);

struct TwoStateParams {
  double alpha = geometry::kPi / 2;
  double r0 = 0.5;
  double r_alpha = 0.5;
  double p = 0.5;

  double q() const { return 1.0 - p; }
};
void Validate(const TwoStateParams& params);
MarkLaw ToMarkLaw(const TwoStateParams& params);
// |B^{0,alpha}_{R0,R_alpha}| = 4 R0 R_alpha sin(alpha).
double ContactArea(const TwoStateParams& params);

struct ThreeStateParams {
  double alpha = geometry::kPi / 3;
  double beta = 2 * geometry::kPi / 3;
  double r0 = 1.0;
  double r_alpha = 1.0;
  double r_beta = 1.0;
  double p0 = 1.0 / 3;
  double p_alpha = 1.0 / 3;
  double p_beta = 1.0 / 3;

  DirPair dirs() const { return {alpha, beta}; }
};
void Validate(const ThreeStateParams& params);
MarkLaw ToMarkLaw(const ThreeStateParams& params);

struct ParamsH {
  double c = 0.0;
  double h0 = 0.0;
  double h_alpha = 0.0;
  double h_beta = 0.0;
  double a = 0.0;  // h_alpha / h0
  double b = 0.0;  // h_beta / h0
};
ParamsH DeriveH(const ThreeStateParams& params);

// Builds parameters with prescribed H values: R0 = H0 sin(beta - alpha),
// R_alpha = H_alpha sin(beta), R_beta = H_beta sin(alpha).
ThreeStateParams FromH(double alpha, double beta, double h0, double h_alpha,
                       double h_beta, double p0, double p_alpha, double p_beta);

enum class Orientation { kZero = 0, kAlpha = 1, kBeta = 2 };
std::string ToString(Orientation o);

// |B^{0,alpha}_{R0,R_alpha} u B^{0,beta}_{R0,R_beta}| in closed form.
double UnionAreaLemma41(double h0, double h_alpha, double h_beta, double c);

// The same union, and its shifted version, evaluated with the polygon kernel.
double BaseUnionAreaGeometric(const ThreeStateParams& params);
double DeltaXGeometric(Vec2 x, const ThreeStateParams& params);

enum class DeltaCase { kI, kIIa, kIIb, kIIc, kIId, kOutside };
std::string ToString(DeltaCase c);
// Sub-case of the piecewise excess formula that applies at x, after the
// alpha <-> beta reflection when H_beta > H_alpha.
DeltaCase ClassifyDeltaCase(Vec2 x, const ThreeStateParams& params);

// Normalized excess area Delta(x); piecewise closed form inside the contact
// box, polygon evaluation outside it.
double DeltaX(Vec2 x, const ThreeStateParams& params);

struct HalfLengths {
  double half_a = 0.0;
  double half_b = 0.0;
};
// Half-lengths, along (e_alpha, e_beta), of the box on which Delta vanishes.
HalfLengths ZeroSetHalfLengths(const ThreeStateParams& params);

struct Lemma31Bounds {
  double lower1 = 0.0;
  double lower2 = 0.0;
  double upper = 0.0;
};
// Bounds on |B(x_k) \ B| for same-direction boxes B = B^{alpha,beta}, given
// the h-coordinates of the centers. Requires alpha > 0.
Lemma31Bounds Lemma31(DirPair dirs, double h_alpha, double h_beta,
                      std::span<const double> h_a, std::span<const double> h_b);
// Same bounds from half-lengths and raw centers; valid for alpha = 0 too.
Lemma31Bounds Lemma31Skew(DirPair dirs, double r_alpha, double r_beta,
                          std::span<const Vec2> centers);

enum class LemmaCase { kI, kII, kIII };

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Delta(x_k, y_l | u): xs are centers of alpha-needles and ys of beta-needles
// (each with its last entry at the origin), evaluated with the polygon kernel.
double DeltaPairGeometric(std::span<const Vec2> xs, std::span<const Vec2> ys, Vec2 u,
                          const ThreeStateParams& params);

// Lower/upper bounds on Delta(x_k, y_l). Throws HypothesisError when the
// case's spread conditions fail.
Bounds Lemma43(LemmaCase which, std::span<const Vec2> xs, std::span<const Vec2> ys,
               const ThreeStateParams& params);

// Whether the shift estimate for Delta(x_k, y_l | u) holds, with an absolute
// slack of tol * (H0 + H_alpha + H_beta)^2. Throws HypothesisError when the
// case's conditions fail.
bool Lemma44Check(LemmaCase which, std::span<const Vec2> xs, std::span<const Vec2> ys,
                  Vec2 u, const ThreeStateParams& params, double tol = 1e-9);

// Vacancy exponent Phi for clusters using the two orientations other than
// `absent`.
double PhiP(const ThreeStateParams& params, Orientation absent);
// Phi / (4C).
double RateExponent(const ThreeStateParams& params, Orientation absent);

using OrientationPair = std::pair<Orientation, Orientation>;

struct RegimeVerdict {
  std::vector<OrientationPair> survivors;  // sorted, each pair ordered
  bool fixation = false;
  // A surviving pair with unequal H's whose free region is a segment.
  bool pinned_one_coordinate = false;
  std::string case_label;
  // When case_label == "reduced": the clause label read in the relabeled
  // frame, and roles[i] = original orientation playing role i there.
  std::string reduced_label;
  std::array<Orientation, 3> roles{Orientation::kZero, Orientation::kAlpha,
                                   Orientation::kBeta};
  std::array<double, 3> rates{};  // indexed by absent orientation
};

double ThresholdL1(double p0, double p_alpha, double p_beta);
double ThresholdL2(double p0, double p_alpha, double p_beta);

// Clause label for scaled lengths (a, b) with H0 = 1 and probabilities p,
// or "" when no clause applies directly.
std::string DirectClauseLabel(double a, double b, double p0, double p_alpha,
                              double p_beta, double tie_tol = 1e-9);

RegimeVerdict ClassifyRegime(const ThreeStateParams& params, double tie_tol = 1e-9);

// gamma^k(c1, c2, c3)(u) for points u_1..u_k with u_k = 0.
double GammaK(double c1, double c2, double c3, std::span<const Vec2> u);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
// G^k(c1, c2, c3). Closed form when c3 == 0 unless force_mc is set.
McEstimate GK(double c1, double c2, double c3, int k, std::int64_t budget,
              std::uint64_t seed, bool force_mc = false);

double Thm21LogClusterProb(int k, int l, double lambda, const TwoStateParams& params);
double Thm21ClusterProb(int k, int l, double lambda, const TwoStateParams& params);

using Composition2 = std::pair<int, int>;
struct CompositionLaw {
  int m = 0;
  std::map<Composition2, double> weights;
};
CompositionLaw Thm21CompositionLimit(int m, double p);
// log of the limit weight of (k, m - k), normalized over the shell.
double Thm21LogCompositionLimit(int m, int k, double p);

double EntropyH(double s, double p);

enum class AsymptoticCase { kOne, kTwo, kThree };

struct PrefactorResult {
  double value = 0.0;
  double log_value = 0.0;
  double phi = 0.0;            // Phi for the surviving pair
  double log_rel_std = 0.0;    // relative MC error carried by the G factors
  AsymptoticCase regime = AsymptoticCase::kOne;
};
// Asymptotic value of mu(C0 in Lambda(k) | Gamma0) for a composition with
// exactly one empty orientation (order: 0, alpha, beta).
PrefactorResult Thm22Prefactor(const ThreeStateParams& params, std::array<int, 3> kvec,
                               double lambda, std::int64_t budget = 200000,
                               std::uint64_t seed = 1);

}  // namespace needleperc::formulas

#endif  // NEEDLEPERC_FORMULAS_H_
