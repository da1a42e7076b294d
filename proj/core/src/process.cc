#include "needleperc/process.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <boost/math/distributions/chi_squared.hpp>

#include "needleperc/errors.h"
#include "needleperc/numfmt.h"

namespace needleperc::process {
namespace {

constexpr std::uint64_t kOriginStream = 0x6f726967696eULL;

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CellStream(std::int64_t ix, std::int64_t iy) {
  return SplitMix64(static_cast<std::uint64_t>(ix) * 0x100000001b3ULL) ^
         SplitMix64(static_cast<std::uint64_t>(iy) + 0x51ed270b27a2c4e1ULL);
}

std::discrete_distribution<int> MarkPicker(const MarkLaw& marks) {
  std::vector<double> w;
  for (const auto& e : marks.entries) w.push_back(e.prob);
  return std::discrete_distribution<int>(w.begin(), w.end());
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int Find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void Unite(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

std::vector<int> Relabel(DisjointSets& sets, std::size_t n) {
  std::vector<int> label(n, -1);
  std::unordered_map<int, int> ids;
  for (std::size_t i = 0; i < n; ++i) {
    const int root = sets.Find(static_cast<int>(i));
    auto [it, fresh] = ids.emplace(root, static_cast<int>(ids.size()));
    label[i] = it->second;
  }
  return label;
}

// Uniform grid over needle centers; any two touching needles lie in the same
// or adjacent cells when the cell side is at least the longest full length.
class SpatialHash {
 public:
  SpatialHash(std::span<const Needle> needles) : needles_(needles) {
    double r = 0.0;
    for (const Needle& s : needles) r = std::max(r, s.half_length);
    cell_ = std::max(2.0 * r, 1e-12);
    for (std::size_t i = 0; i < needles.size(); ++i) {
      cells_[Key(CellOf(needles[i].center))].push_back(static_cast<int>(i));
    }
  }

  template <typename Fn>
  void ForEachCandidate(int i, Fn&& fn) const {
    const auto [cx, cy] = CellOf(needles_[i].center);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find(Key({cx + dx, cy + dy}));
        if (it == cells_.end()) continue;
        for (int j : it->second) {
          if (j != i) fn(j);
        }
      }
    }
  }

 private:
  std::pair<std::int64_t, std::int64_t> CellOf(Vec2 c) const {
    return {static_cast<std::int64_t>(std::floor(c.x1 / cell_)),
            static_cast<std::int64_t>(std::floor(c.x2 / cell_))};
  }
  static std::uint64_t Key(std::pair<std::int64_t, std::int64_t> c) {
    return (static_cast<std::uint64_t>(c.first) << 32) ^
           (static_cast<std::uint64_t>(c.second) & 0xffffffffULL);
  }

  std::span<const Needle> needles_;
  double cell_ = 1.0;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

bool NearEdge(const Needle& s, const SimWindow& w, double band) {
  const geometry::Segment seg = geometry::Endpoints(s);
  const double lo1 = std::min(seg.a.x1, seg.b.x1);
  const double hi1 = std::max(seg.a.x1, seg.b.x1);
  const double lo2 = std::min(seg.a.x2, seg.b.x2);
  const double hi2 = std::max(seg.a.x2, seg.b.x2);
  return lo1 <= -w.half_width + band || hi1 >= w.half_width - band ||
         lo2 <= -w.half_height + band || hi2 >= w.half_height - band;
}

Vec2 Centroid(std::span<const Vec2> pts) {
  Vec2 c{};
  for (const Vec2& p : pts) c = c + p;
  return (1.0 / static_cast<double>(pts.size())) * c;
}

}  // namespace

SimWindow DefaultWindow(const MarkLaw& marks, double lambda) {
  const double h = std::max(20.0 * marks.MaxHalfLength(), 5.0 / std::sqrt(lambda));
  return {h, h};
}

void Validate(const SimConfig& config) {
  if (!(config.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(config.window.half_width > 0.0 && config.window.half_height > 0.0)) {
    throw std::invalid_argument("window extents must be positive");
  }
  if (config.marks.entries.empty()) throw std::invalid_argument("mark law is empty");
  if (config.max_needles < 1) throw std::invalid_argument("needle cap must be >= 1");
}

std::uint64_t StreamSeed(std::uint64_t seed, std::uint64_t stream) {
  return SplitMix64(SplitMix64(seed) ^ SplitMix64(stream + 0x632be59bd9b4e019ULL));
}

std::vector<Needle> SamplePpp(const SimConfig& config) {
  Validate(config);
  const SimWindow& w = config.window;
  const auto x0 = static_cast<std::int64_t>(std::floor(-w.half_width));
  const auto x1 = static_cast<std::int64_t>(std::ceil(w.half_width));
  const auto y0 = static_cast<std::int64_t>(std::floor(-w.half_height));
  const auto y1 = static_cast<std::int64_t>(std::ceil(w.half_height));

  std::vector<Needle> out;
  std::poisson_distribution<std::int64_t> count(config.lambda);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = MarkPicker(config.marks);
  for (std::int64_t iy = y0; iy < y1; ++iy) {
    for (std::int64_t ix = x0; ix < x1; ++ix) {
      std::mt19937_64 rng(StreamSeed(config.seed, CellStream(ix, iy)));
      const std::int64_t n = count(rng);
      for (std::int64_t j = 0; j < n; ++j) {
        const Vec2 c{static_cast<double>(ix) + unit(rng), static_cast<double>(iy) + unit(rng)};
        const auto& e = config.marks.entries[pick(rng)];
        if (std::fabs(c.x1) > w.half_width || std::fabs(c.x2) > w.half_height) continue;
        if (static_cast<std::int64_t>(out.size()) >= config.max_needles) {
          throw CapacityError("sample exceeds the needle cap of " +
                              std::to_string(config.max_needles));
        }
        out.push_back(Needle{c, e.angle, e.half_length});
      }
    }
  }
  return out;
}

std::vector<Needle> PalmSample(const SimConfig& config) {
  std::vector<Needle> rest = SamplePpp(config);
  std::mt19937_64 rng(StreamSeed(config.seed, kOriginStream));
  auto pick = MarkPicker(config.marks);
  const auto& e = config.marks.entries[pick(rng)];
  std::vector<Needle> out;
  out.reserve(rest.size() + 1);
  out.push_back(Needle{{0.0, 0.0}, e.angle, e.half_length});
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<int> BuildClusters(std::span<const Needle> needles) {
  DisjointSets sets(needles.size());
  const SpatialHash hash(needles);
  for (std::size_t i = 0; i < needles.size(); ++i) {
    const int ii = static_cast<int>(i);
    hash.ForEachCandidate(ii, [&](int j) {
      if (j > ii && geometry::NeedlesIntersect(needles[i], needles[j])) sets.Unite(ii, j);
    });
  }
  return Relabel(sets, needles.size());
}

std::vector<int> BuildClustersBruteForce(std::span<const Needle> needles) {
  DisjointSets sets(needles.size());
  for (std::size_t i = 0; i < needles.size(); ++i) {
    for (std::size_t j = i + 1; j < needles.size(); ++j) {
      if (geometry::NeedlesIntersect(needles[i], needles[j])) {
        sets.Unite(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  return Relabel(sets, needles.size());
}

ClusterReport OriginCluster(std::span<const Needle> needles, const SimWindow& window,
                            const MarkLaw& marks) {
  int origin = -1;
  for (std::size_t i = 0; i < needles.size(); ++i) {
    if (needles[i].center == Vec2{}) {
      origin = static_cast<int>(i);
      break;
    }
  }
  if (origin < 0) throw std::invalid_argument("no needle centered at the origin");

  const SpatialHash hash(needles);
  std::vector<char> seen(needles.size(), 0);
  std::vector<int> members{origin};
  seen[origin] = 1;
  for (std::size_t head = 0; head < members.size(); ++head) {
    const int i = members[head];
    hash.ForEachCandidate(i, [&](int j) {
      if (!seen[j] && geometry::NeedlesIntersect(needles[i], needles[j])) {
        seen[j] = 1;
        members.push_back(j);
      }
    });
  }
  std::sort(members.begin(), members.end());

  ClusterReport report;
  const std::size_t d = marks.size();
  report.composition.assign(d, 0);
  const double band = marks.MaxHalfLength();
  std::vector<std::vector<Vec2>> centers(d);
  for (int i : members) {
    const Needle& s = needles[i];
    report.needles.push_back(s);
    const int idx = marks.IndexOfAngle(s.angle);
    if (idx < 0) throw std::invalid_argument("needle angle is not in the mark law");
    ++report.composition[idx];
    centers[idx].push_back(s.center);
    if (NearEdge(s, window, band)) report.censored = true;
  }
  if (report.censored) return report;

  geometry::DirPair frame{0.0, geometry::kPi / 2};
  if (d >= 2) frame = {marks.entries[d - 2].angle, marks.entries[d - 1].angle};
  for (std::size_t j = 0; j < d; ++j) {
    report.hull_area.push_back(geometry::ConvexHullArea(centers[j]));
    if (centers[j].empty()) {
      report.spreads.emplace_back(0.0, 0.0);
      continue;
    }
    std::vector<double> s, t;
    for (const Vec2& c : centers[j]) {
      const Vec2 st = geometry::SkewCoords(c, frame);
      s.push_back(st.x1);
      t.push_back(st.x2);
    }
    report.spreads.emplace_back(geometry::MaxSpread(s), geometry::MaxSpread(t));
  }
  return report;
}

void ParallelFor(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    while (!failed.load()) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  const int count = static_cast<int>(std::min<std::int64_t>(threads, n));
  std::vector<std::thread> pool;
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

ProbEstimate CompositionHistogram::Unconditional(const Composition& k) const {
  if (trials == 0) return {};
  const auto it = counts.find(k);
  const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
  const double p = c / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

std::int64_t CompositionHistogram::EventsOfSize(int m) const {
  std::int64_t n = 0;
  for (const auto& [k, c] : counts) {
    if (std::accumulate(k.begin(), k.end(), 0) == m) n += c;
  }
  return n;
}

std::map<Composition, ProbEstimate> CompositionHistogram::ConditionalOnSize(int m) const {
  std::map<Composition, ProbEstimate> out;
  const double n = static_cast<double>(EventsOfSize(m));
  if (n == 0.0) return out;
  for (const auto& [k, c] : counts) {
    if (std::accumulate(k.begin(), k.end(), 0) != m) continue;
    const double p = static_cast<double>(c) / n;
    out[k] = {p, std::sqrt(p * (1.0 - p) / n)};
  }
  return out;
}

CompositionHistogram CompositionHistogramOf(const SimConfig& config, std::int64_t trials,
                                            int threads) {
  Validate(config);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  struct Outcome {
    bool censored = false;
    Composition k;
  };
  std::vector<Outcome> results(trials);
  ParallelFor(trials, threads, [&](std::int64_t i) {
    SimConfig c = config;
    c.seed = StreamSeed(config.seed, static_cast<std::uint64_t>(i));
    const std::vector<Needle> sample = PalmSample(c);
    const ClusterReport rep = OriginCluster(sample, c.window, c.marks);
    results[i] = {rep.censored, rep.composition};
  });
  CompositionHistogram h;
  h.trials = trials;
  for (const auto& r : results) {
    if (r.censored) {
      ++h.censored;
    } else {
      ++h.counts[r.k];
    }
  }
  return h;
}

int MinorityIndex(const MarkLaw& marks) {
  int best = 0;
  for (std::size_t i = 1; i < marks.size(); ++i) {
    if (marks.entries[i].prob <= marks.entries[best].prob) best = static_cast<int>(i);
  }
  return best;
}

Vec2 RelativeMinorityPosition(std::span<const Needle> cluster, const MarkLaw& marks) {
  if (marks.size() != 2) throw std::invalid_argument("relative position needs a two-entry law");
  const int minor = MinorityIndex(marks);
  const int other = 1 - minor;
  std::vector<Vec2> a, b;
  for (const Needle& s : cluster) {
    (marks.IndexOfAngle(s.angle) == minor ? a : b).push_back(s.center);
  }
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("relative position needs both orientations present");
  }
  const auto& eo = marks.entries[other];
  const auto& em = marks.entries[minor];
  // Frame (e_other, e_minor); reorder so the skew-coordinate helper sees
  // increasing angles.
  const Vec2 rel = Centroid(a) - Centroid(b);
  Vec2 st;
  if (eo.angle < em.angle) {
    st = geometry::SkewCoords(rel, {eo.angle, em.angle});
  } else {
    const Vec2 ts = geometry::SkewCoords(rel, {em.angle, eo.angle});
    st = {ts.x2, ts.x1};
  }
  return {st.x1 / eo.half_length, st.x2 / em.half_length};
}

int UniformityBin(Vec2 v) {
  if (std::fabs(v.x1) > 1.0 || std::fabs(v.x2) > 1.0) return -1;
  auto slot = [](double u) { return std::min(3, static_cast<int>(std::floor((u + 1.0) * 2.0))); };
  return slot(v.x1) * 4 + slot(v.x2);
}

CompressionSummary CompressionStats(const SimConfig& config, std::int64_t trials,
                                    int target_size, int threads) {
  Validate(config);
  if (target_size < 2) throw std::invalid_argument("target size must be >= 2");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  struct Outcome {
    bool hit = false;
    double hull = 0.0;
    int bin = -1;
  };
  const int minor = MinorityIndex(config.marks);
  std::vector<Outcome> results(trials);
  ParallelFor(trials, threads, [&](std::int64_t i) {
    SimConfig c = config;
    c.seed = StreamSeed(config.seed, static_cast<std::uint64_t>(i));
    const std::vector<Needle> sample = PalmSample(c);
    const ClusterReport rep = OriginCluster(sample, c.window, c.marks);
    if (rep.censored || rep.size() != target_size) return;
    Outcome o;
    o.hit = true;
    o.hull = rep.hull_area[minor];
    const bool mixed = std::count_if(rep.composition.begin(), rep.composition.end(),
                                     [](int n) { return n > 0; }) == 2;
    if (config.marks.size() == 2 && mixed) {
      o.bin = UniformityBin(RelativeMinorityPosition(rep.needles, c.marks));
    }
    results[i] = o;
  });

  CompressionSummary s;
  s.lambda = config.lambda;
  s.trials = trials;
  double sum = 0.0, sum2 = 0.0;
  for (const auto& o : results) {
    if (!o.hit) continue;
    ++s.events;
    sum += o.hull;
    sum2 += o.hull * o.hull;
    if (o.bin >= 0) ++s.bins[o.bin];
  }
  if (s.events > 0) {
    const double n = static_cast<double>(s.events);
    s.mean_hull = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum2 - n * s.mean_hull * s.mean_hull) / (n - 1)) : 0.0;
    s.hull_std_error = std::sqrt(var / n);
  }
  return s;
}

ChiSquare UniformChiSquare(std::span<const double> proportions, double n_eff) {
  if (proportions.size() < 2) throw std::invalid_argument("need at least two bins");
  const double expected = 1.0 / static_cast<double>(proportions.size());
  ChiSquare out;
  for (double p : proportions) out.statistic += (p - expected) * (p - expected) / expected;
  out.statistic *= n_eff;
  const boost::math::chi_squared_distribution<double> dist(
      static_cast<double>(proportions.size() - 1));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

void WriteNeedles(std::ostream& out, std::span<const Needle> needles) {
  for (const Needle& s : needles) {
    out << FormatShortest(s.center.x1) << ' ' << FormatShortest(s.center.x2) << ' '
        << FormatShortest(s.angle) << ' ' << FormatShortest(s.half_length) << '\n';
  }
}

std::vector<Needle> ReadNeedles(std::istream& in) {
  std::vector<Needle> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    double x, y, th, r;
    if (!(ss >> x >> y >> th >> r)) {
      throw std::invalid_argument("malformed needle on line " + std::to_string(lineno));
    }
    out.push_back(geometry::MakeNeedle({x, y}, th, r));
  }
  return out;
}

}  // namespace needleperc::process
