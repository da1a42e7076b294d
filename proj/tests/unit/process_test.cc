#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "needleperc/errors.h"
#include "needleperc/estimation.h"
#include "needleperc/process.h"

namespace needleperc::process {
namespace {

constexpr double kPiD = std::numbers::pi;
using Rng = std::mt19937_64;

double U(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(rng); }

MarkLaw TwoState(double p, double r = 0.5) {
  return formulas::ToMarkLaw(formulas::TwoStateParams{kPiD / 2, r, r, p});
}

SimConfig Config(double lambda, double half, const MarkLaw& marks, std::uint64_t seed) {
  SimConfig c;
  c.lambda = lambda;
  c.window = {half, half};
  c.marks = marks;
  c.seed = seed;
  return c;
}

std::vector<Needle> Chain() {
  return {geometry::MakeNeedle({0, 0}, 0, 1), geometry::MakeNeedle({0.5, 0.5}, kPiD / 2, 1),
          geometry::MakeNeedle({1, 1}, 0, 1)};
}

// Same partition up to relabeling.
bool SamePartition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

TEST(SamplePpp, MeanCount) {
  const SimConfig base = Config(2.0, 5.0, TwoState(0.5), 0);
  double sum = 0;
  const int n = 1000;
  for (int s = 0; s < n; ++s) {
    SimConfig c = base;
    c.seed = StreamSeed(99, s);
    sum += SamplePpp(c).size();
  }
  EXPECT_NEAR(sum / n, 200.0, 3 * std::sqrt(200.0 / n));
}

TEST(SamplePpp, VoidProbability) {
  const SimConfig base = Config(0.1, 0.5, TwoState(0.5), 0);
  const int n = 100000;
  int empty = 0;
  for (int s = 0; s < n; ++s) {
    SimConfig c = base;
    c.seed = StreamSeed(7, s);
    if (SamplePpp(c).empty()) ++empty;
  }
  const double want = std::exp(-0.1);
  EXPECT_NEAR(static_cast<double>(empty) / n, want, 3 * std::sqrt(want * (1 - want) / n));
}

TEST(SamplePpp, MarkFrequenciesAndWindow) {
  const SimConfig c = Config(1000.0, 5.0, TwoState(0.3), 5);
  const std::vector<Needle> s = SamplePpp(c);
  ASSERT_GT(s.size(), 90000u);
  const double n = static_cast<double>(s.size());
  const double zero = std::count_if(s.begin(), s.end(), [](const Needle& x) { return x.angle == 0.0; });
  EXPECT_NEAR(zero / n, 0.3, 3 * std::sqrt(0.21 / n));
  for (const Needle& x : s) {
    ASSERT_LE(std::fabs(x.center.x1), 5.0);
    ASSERT_LE(std::fabs(x.center.x2), 5.0);
  }
}

TEST(SamplePpp, CountVarianceMatchesMean) {
  const SimConfig base = Config(3.0, 1.0, TwoState(0.5), 0);
  const int n = 20000;
  double s1 = 0, s2 = 0;
  for (int s = 0; s < n; ++s) {
    SimConfig c = base;
    c.seed = StreamSeed(3, s);
    const double k = SamplePpp(c).size();
    s1 += k;
    s2 += k * k;
  }
  const double mean = s1 / n, var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 12.0, 3 * std::sqrt(12.0 / n));
  // Var of the sample variance for Poisson(mu) is about (mu + 2 mu^2) / n.
  EXPECT_NEAR(var, 12.0, 3 * std::sqrt((12.0 + 2 * 144.0) / n));
}

TEST(SamplePpp, CapExceededThrows) {
  SimConfig c = Config(50.0, 5.0, TwoState(0.5), 1);
  c.max_needles = 100;
  EXPECT_THROW(SamplePpp(c), CapacityError);
}

TEST(SamplePpp, NestedWindowsShareNeedles) {
  const SimConfig small = Config(4.0, 3.0, TwoState(0.5), 11);
  SimConfig big = small;
  big.window = {6.0, 6.0};
  const std::vector<Needle> a = SamplePpp(small), b = SamplePpp(big);
  std::vector<Needle> inner;
  for (const Needle& n : b) {
    if (std::fabs(n.center.x1) <= 3.0 && std::fabs(n.center.x2) <= 3.0) inner.push_back(n);
  }
  ASSERT_EQ(inner.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(inner[i].center, a[i].center);
    EXPECT_EQ(inner[i].angle, a[i].angle);
  }
}

TEST(PalmSample, OriginNeedleFirstAndDeterministic) {
  const SimConfig c = Config(2.0, 4.0, TwoState(0.5), 21);
  const std::vector<Needle> a = PalmSample(c), b = PalmSample(c);
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a[0].center, (Vec2{0, 0}));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].center, b[i].center);
    EXPECT_EQ(a[i].angle, b[i].angle);
  }
}

TEST(PalmSample, OriginMarkFrequency) {
  const SimConfig base = Config(0.01, 0.5, TwoState(0.7), 0);
  const int n = 100000;
  int zero = 0;
  for (int s = 0; s < n; ++s) {
    SimConfig c = base;
    c.seed = StreamSeed(13, s);
    if (PalmSample(c)[0].angle == 0.0) ++zero;
  }
  EXPECT_NEAR(static_cast<double>(zero) / n, 0.7, 3 * std::sqrt(0.21 / n));
}

TEST(BuildClusters, Empty) { EXPECT_TRUE(BuildClusters(std::vector<Needle>{}).empty()); }

TEST(BuildClusters, ChainIsOneCluster) {
  const std::vector<int> labels = BuildClusters(Chain());
  EXPECT_EQ(labels, (std::vector<int>{0, 0, 0}));
}

TEST(BuildClusters, MatchesBruteForce) {
  Rng rng(1);
  for (int t = 0; t < 30; ++t) {
    std::vector<Needle> n;
    for (int i = 0; i < 200; ++i) {
      n.push_back(geometry::MakeNeedle({U(rng, -6, 6), U(rng, -6, 6)},
                                       U(rng, 0, kPiD), U(rng, 0.1, 1.0)));
    }
    EXPECT_EQ(BuildClusters(n), BuildClustersBruteForce(n));
  }
}

TEST(BuildClusters, InvariantUnderPermutationAndRigidMotion) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    std::vector<Needle> n;
    for (int i = 0; i < 150; ++i) {
      n.push_back(geometry::MakeNeedle({U(rng, -5, 5), U(rng, -5, 5)},
                                       U(rng, 0, kPiD), U(rng, 0.1, 1.0)));
    }
    const std::vector<int> base = BuildClusters(n);

    std::vector<std::size_t> perm(n.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Needle> shuffled;
    for (std::size_t i : perm) shuffled.push_back(n[i]);
    const std::vector<int> ps = BuildClusters(shuffled);
    std::vector<int> back(n.size());
    for (std::size_t i = 0; i < perm.size(); ++i) back[perm[i]] = ps[i];
    EXPECT_TRUE(SamePartition(base, back));

    const double rot = U(rng, 0, kPiD);
    const Vec2 shift{U(rng, -20, 20), U(rng, -20, 20)};
    std::vector<Needle> moved;
    for (const Needle& s : n) {
      const Vec2 c{std::cos(rot) * s.center.x1 - std::sin(rot) * s.center.x2,
                   std::sin(rot) * s.center.x1 + std::cos(rot) * s.center.x2};
      moved.push_back(geometry::MakeNeedle(c + shift, s.angle + rot, s.half_length));
    }
    EXPECT_TRUE(SamePartition(base, BuildClusters(moved)));
  }
}

TEST(OriginCluster, IsolatedOriginNeedle) {
  const MarkLaw marks = TwoState(0.5, 1.0);
  const std::vector<Needle> n{geometry::MakeNeedle({0, 0}, kPiD / 2, 1),
                              geometry::MakeNeedle({5, 5}, 0, 1)};
  const ClusterReport r = OriginCluster(n, {20, 20}, marks);
  EXPECT_EQ(r.composition, (std::vector<int>{0, 1}));
  EXPECT_FALSE(r.censored);
  EXPECT_EQ(r.size(), 1);
}

TEST(OriginCluster, ChainComposition) {
  const ClusterReport r = OriginCluster(Chain(), {20, 20}, TwoState(0.5, 1.0));
  EXPECT_EQ(r.composition, (std::vector<int>{2, 1}));
  EXPECT_FALSE(r.censored);
  ASSERT_EQ(r.hull_area.size(), 2u);
  EXPECT_EQ(r.hull_area[0], 0.0);
}

TEST(OriginCluster, ChainReachingBoundaryIsCensored) {
  const ClusterReport r = OriginCluster(Chain(), {2.5, 2.5}, TwoState(0.5, 1.0));
  EXPECT_TRUE(r.censored);
  EXPECT_TRUE(r.hull_area.empty());
}

TEST(OriginCluster, EnlargingWindowNeverCensorsMore) {
  const MarkLaw marks = TwoState(0.5);
  for (int s = 0; s < 300; ++s) {
    SimConfig c = Config(1.5, 3.0, marks, StreamSeed(31, s));
    const ClusterReport small = OriginCluster(PalmSample(c), c.window, marks);
    c.window = {6.0, 6.0};
    const ClusterReport big = OriginCluster(PalmSample(c), c.window, marks);
    if (!small.censored) {
      EXPECT_FALSE(big.censored);
      EXPECT_EQ(big.composition, small.composition);
    }
  }
}

TEST(CompositionHistogram, SingletonMatchesIntegrator) {
  const MarkLaw marks = TwoState(0.6);
  // A singleton origin needle is never within reach of this window's edge.
  const SimConfig c = Config(0.2, 3.0, marks, 41);
  const CompositionHistogram h = CompositionHistogramOf(c, 20000);
  const ProbEstimate sim = h.Unconditional({1, 0});
  const estimation::Estimate mu =
      estimation::MuEstimate({{1, 0}, 0.2, marks}, estimation::IntegrateOptions{});
  EXPECT_NEAR(mu.value, 0.6 * std::exp(-0.2 * 0.4), 1e-12);
  EXPECT_NEAR(sim.prob, mu.value, 3 * std::hypot(sim.std_error, mu.std_error));
}

TEST(CompositionHistogram, SymmetricLawIsExchangeable) {
  const MarkLaw marks = TwoState(0.5);
  const CompositionHistogram h = CompositionHistogramOf(Config(1.0, 3.0, marks, 43), 20000);
  for (auto [k, l] : {std::pair{1, 0}, std::pair{2, 1}, std::pair{3, 1}}) {
    const ProbEstimate a = h.Unconditional({k, l}), b = h.Unconditional({l, k});
    EXPECT_NEAR(a.prob, b.prob, 3 * std::hypot(a.std_error, b.std_error) + 1e-12);
  }
}

TEST(CompositionHistogram, DeterministicAcrossThreads) {
  const MarkLaw marks = TwoState(0.5);
  const SimConfig c = Config(1.0, 3.0, marks, 47);
  const CompositionHistogram a = CompositionHistogramOf(c, 2000, 1);
  const CompositionHistogram b = CompositionHistogramOf(c, 2000, 3);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.censored, b.censored);
}

TEST(CompositionHistogram, ConditionalSumsToOne) {
  const MarkLaw marks = TwoState(0.5);
  const CompositionHistogram h = CompositionHistogramOf(Config(1.0, 3.0, marks, 53), 5000);
  double sum = 0;
  for (const auto& [k, e] : h.ConditionalOnSize(3)) sum += e.prob;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(CompressionStats, PairsHaveZeroHull) {
  const MarkLaw marks = TwoState(0.5);
  const SimConfig c = Config(1.0, 3.0, marks, 59);
  const CompressionSummary s = CompressionStats(c, 3000, 2);
  EXPECT_GT(s.events, 0);
  EXPECT_EQ(s.mean_hull, 0.0);
}

TEST(MinorityIndex, SmallestProbabilityWithTiesToLater) {
  EXPECT_EQ(MinorityIndex(TwoState(0.3)), 0);
  EXPECT_EQ(MinorityIndex(TwoState(0.7)), 1);
  EXPECT_EQ(MinorityIndex(TwoState(0.5)), 1);
}

TEST(UniformityBin, Corners) {
  EXPECT_EQ(UniformityBin({-1, -1}), 0);
  EXPECT_EQ(UniformityBin({1, 1}), 15);
  EXPECT_EQ(UniformityBin({1.01, 0}), -1);
}

TEST(UniformChiSquare, UniformProportions) {
  const std::vector<double> flat(16, 1.0 / 16);
  const ChiSquare c = UniformChiSquare(flat, 1000);
  EXPECT_NEAR(c.statistic, 0.0, 1e-12);
  EXPECT_NEAR(c.p_value, 1.0, 1e-12);
  std::vector<double> skew(16, 0.05);
  skew[0] = 0.25;
  EXPECT_LT(UniformChiSquare(skew, 1000).p_value, 1e-6);
}

TEST(NeedleText, RoundTrip) {
  Rng rng(3);
  std::vector<Needle> n;
  for (int i = 0; i < 50; ++i) {
    n.push_back(geometry::MakeNeedle({U(rng, -5, 5), U(rng, -5, 5)}, U(rng, 0, kPiD), U(rng, 0.1, 2)));
  }
  std::stringstream ss;
  WriteNeedles(ss, n);
  const std::vector<Needle> back = ReadNeedles(ss);
  ASSERT_EQ(back.size(), n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    EXPECT_EQ(back[i].center, n[i].center);
    EXPECT_EQ(back[i].angle, n[i].angle);
    EXPECT_EQ(back[i].half_length, n[i].half_length);
  }
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  ParallelFor(1000, 3, [&](std::int64_t i) { ++hits[i]; });
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

}  // namespace
}  // namespace needleperc::process
