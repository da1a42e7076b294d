#ifndef NEEDLEPERC_PROCESS_H_
#define NEEDLEPERC_PROCESS_H_

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "needleperc/formulas.h"
#include "needleperc/geometry.h"

namespace needleperc::process {

using formulas::MarkLaw;
using geometry::Needle;
using geometry::Vec2;

struct SimWindow {
  double half_width = 10.0;
  double half_height = 10.0;
};

// max(10 * longest needle, 5 / sqrt(lambda)) on both axes.
SimWindow DefaultWindow(const MarkLaw& marks, double lambda);

struct SimConfig {
  double lambda = 1.0;
  SimWindow window;
  MarkLaw marks;
  std::uint64_t seed = 1;
  std::int64_t max_needles = 5'000'000;
  bool palm = true;
};
void Validate(const SimConfig& config);

// Deterministic 64-bit mixing of (seed, stream) used to give every trial,
// batch and grid cell its own generator.
std::uint64_t StreamSeed(std::uint64_t seed, std::uint64_t stream);

// Poisson needle process restricted to the window. The plane is tiled by
// unit cells, each filled from its own stream, so a larger window reuses the
// needles of a smaller one.
std::vector<Needle> SamplePpp(const SimConfig& config);

// SamplePpp plus a needle centered at the origin, placed first.
std::vector<Needle> PalmSample(const SimConfig& config);

// Component label per needle; labels are 0, 1, ... in order of first
// appearance.
std::vector<int> BuildClusters(std::span<const Needle> needles);

// Same partition by checking every pair; test oracle.
std::vector<int> BuildClustersBruteForce(std::span<const Needle> needles);

struct ClusterReport {
  std::vector<int> composition;  // count per mark-law entry
  std::vector<Needle> needles;
  bool censored = false;
  std::vector<double> hull_area;  // per entry; empty when censored
  // Per entry: spreads of the centers' skew coordinates in the frame of the
  // last two mark angles. Empty when censored.
  std::vector<std::pair<double, double>> spreads;

  int size() const { return static_cast<int>(needles.size()); }
};

// The component of the needle centered at the origin. A cluster is censored
// when a member comes within the longest half-length of the window edge,
// since an unsampled needle centered outside could then touch it.
ClusterReport OriginCluster(std::span<const Needle> needles, const SimWindow& window,
                            const MarkLaw& marks);

// Runs fn(i) for i in [0, n) on up to `threads` workers.
void ParallelFor(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn);

using Composition = std::vector<int>;

struct ProbEstimate {
  double prob = 0.0;
  double std_error = 0.0;
};

struct CompositionHistogram {
  std::int64_t trials = 0;
  std::int64_t censored = 0;
  std::map<Composition, std::int64_t> counts;  // uncensored origin clusters

  // Fraction of all trials, with binomial error.
  ProbEstimate Unconditional(const Composition& k) const;
  std::int64_t EventsOfSize(int m) const;
  // Distribution over compositions among uncensored clusters of size m.
  std::map<Composition, ProbEstimate> ConditionalOnSize(int m) const;
};

// Trial i uses the Palm sample with seed StreamSeed(config.seed, i).
CompositionHistogram CompositionHistogramOf(const SimConfig& config, std::int64_t trials,
                                            int threads = 1);

// Index of the orientation treated as the minority: smallest probability,
// ties resolved toward the later entry.
int MinorityIndex(const MarkLaw& marks);

// Position of the minority centroid relative to the centroid of the other
// centers, in coordinates of B^{theta_other, theta_minor}_{R_other, R_minor}
// normalized to [-1, 1]^2. Requires a two-entry law and both orientations
// present.
Vec2 RelativeMinorityPosition(std::span<const Needle> cluster, const MarkLaw& marks);

// Flat 4x4 bin index of a point of [-1, 1]^2, or -1 outside.
int UniformityBin(Vec2 normalized);

struct CompressionSummary {
  double lambda = 0.0;
  std::int64_t trials = 0;
  std::int64_t events = 0;  // uncensored origin clusters of the target size
  double mean_hull = 0.0;
  double hull_std_error = 0.0;
  std::array<std::int64_t, 16> bins{};  // relative minority position
};

// Simulation statistics of uncensored origin clusters of size target_size.
CompressionSummary CompressionStats(const SimConfig& config, std::int64_t trials,
                                    int target_size, int threads = 1);

// Chi-square statistic and p-value of 16 bin proportions against the uniform
// law, with n_eff effective observations.
struct ChiSquare {
  double statistic = 0.0;
  double p_value = 1.0;
};
ChiSquare UniformChiSquare(std::span<const double> proportions, double n_eff);

// "x y theta r" per line.
void WriteNeedles(std::ostream& out, std::span<const Needle> needles);
std::vector<Needle> ReadNeedles(std::istream& in);

}  // namespace needleperc::process

#endif  // NEEDLEPERC_PROCESS_H_
