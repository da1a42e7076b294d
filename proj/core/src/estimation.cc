#include "needleperc/estimation.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "needleperc/errors.h"

namespace needleperc::estimation {
namespace {

using geometry::SkewBox;
using geometry::Vec2;

constexpr std::int64_t kBatch = 1024;
constexpr std::int64_t kMinBudget = 1000;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Slot {
  double angle = 0.0;
  double half_length = 0.0;
  int entry = 0;
  double k_par = 1.0;   // Laplace rate along the needle
  double k_perp = 1.0;  // Laplace rate across the needle
};

class Integrand {
 public:
  Integrand(const CompositionQuery& q, const IntegrateOptions& opts)
      : lambda_(q.lambda), marks_(q.marks), proposal_(opts.proposal) {
    const auto& e = marks_.entries;
    int origin_entry = -1;
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (q.kvec[j] > 0) {
        origin_entry = static_cast<int>(j);
        break;
      }
    }
    const double rmax = marks_.MaxHalfLength();
    auto make_slot = [&](int j) {
      Slot s;
      s.angle = e[j].angle;
      s.half_length = e[j].half_length;
      s.entry = j;
      double par = 0.0;
      for (const auto& f : e) par += f.prob * 2.0 * f.half_length * std::fabs(std::sin(f.angle - s.angle));
      const double perp = (1.0 - e[j].prob) * 2.0 * s.half_length;
      s.k_par = std::max(0.5 * lambda_ * par, 0.25 / rmax);
      s.k_perp = std::max(0.5 * lambda_ * perp, 0.25 / rmax);
      return s;
    };
    slots_.push_back(make_slot(origin_entry));
    for (std::size_t j = 0; j < e.size(); ++j) {
      const int extra = q.kvec[j] - (static_cast<int>(j) == origin_entry ? 1 : 0);
      for (int c = 0; c < extra; ++c) slots_.push_back(make_slot(static_cast<int>(j)));
    }
    m_ = static_cast<int>(slots_.size());
    double total = 0.0;
    for (const Slot& s : slots_) total += 2.0 * s.half_length;
    box_half_ = opts.box_half_width > 0.0 ? opts.box_half_width : total;
    log_fact_ = std::lgamma(static_cast<double>(m_));
  }

  int m() const { return m_; }

  // Draws free centers; pos[0] stays at the origin.
  void Draw(std::mt19937_64& rng, std::vector<Vec2>& pos) const {
    pos.assign(m_, Vec2{});
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    if (proposal_ == Proposal::kUniformBox) {
      for (int i = 1; i < m_; ++i) pos[i] = {box_half_ * unit(rng), box_half_ * unit(rng)};
      return;
    }
    std::vector<int> order(m_ - 1);
    std::iota(order.begin(), order.end(), 1);
    std::shuffle(order.begin(), order.end(), rng);
    std::exponential_distribution<double> expo(1.0);
    std::bernoulli_distribution coin(0.5);
    for (int t = 0; t < m_ - 1; ++t) {
      const int c = order[t];
      std::uniform_int_distribution<int> pick(0, t);
      const int r = pick(rng);
      const int p = r == 0 ? 0 : order[r - 1];
      const Slot& sc = slots_[c];
      const Slot& sp = slots_[p];
      if (sc.angle != sp.angle) {
        const SkewBox box = *geometry::ContactBox(NeedleAt(p, pos[p]), sc.angle, sc.half_length);
        pos[c] = box.center + (box.half_a * unit(rng)) * geometry::UnitVector(box.dirs.alpha) +
                 (box.half_b * unit(rng)) * geometry::UnitVector(box.dirs.beta);
      } else {
        const double a = (coin(rng) ? 1.0 : -1.0) * expo(rng) / sc.k_par;
        const double b = (coin(rng) ? 1.0 : -1.0) * expo(rng) / sc.k_perp;
        const Vec2 e = geometry::UnitVector(sc.angle);
        pos[c] = pos[p] + a * e + b * Vec2{-e.x2, e.x1};
      }
    }
  }

  double Density(const std::vector<Vec2>& pos) const {
    if (m_ == 1) return 1.0;
    if (proposal_ == Proposal::kUniformBox) {
      for (int i = 1; i < m_; ++i) {
        if (std::fabs(pos[i].x1) > box_half_ || std::fabs(pos[i].x2) > box_half_) return 0.0;
      }
      return std::pow(1.0 / (4.0 * box_half_ * box_half_), m_ - 1);
    }
    const int n = m_ - 1;
    std::vector<double> k(static_cast<std::size_t>(n) * m_, 0.0);
    for (int c = 1; c < m_; ++c) {
      for (int p = 0; p < m_; ++p) {
        if (p != c) k[(c - 1) * m_ + p] = Kernel(c, p, pos);
      }
    }
    std::vector<double> dp(std::size_t{1} << n, 0.0);
    dp[0] = 1.0;
    for (std::size_t s = 0; s < dp.size(); ++s) {
      if (dp[s] == 0.0) continue;
      const int t = std::popcount(s);
      for (int c = 0; c < n; ++c) {
        if (s & (std::size_t{1} << c)) continue;
        double sum = k[c * m_ + 0];
        for (int p = 0; p < n; ++p) {
          if (s & (std::size_t{1} << p)) sum += k[c * m_ + p + 1];
        }
        dp[s | (std::size_t{1} << c)] += dp[s] * sum / (t + 1);
      }
    }
    return dp.back() * std::exp(-log_fact_);
  }

  void Needles(const std::vector<Vec2>& pos, std::vector<Needle>& out) const {
    out.clear();
    for (int i = 0; i < m_; ++i) out.push_back(NeedleAt(i, pos[i]));
  }

  // log of the connectivity indicator times the vacancy weight.
  double LogValue(const std::vector<Needle>& needles) const {
    if (!Connected(needles)) return -std::numeric_limits<double>::infinity();
    double exposure = 0.0;
    std::vector<SkewBox> boxes;
    for (const auto& e : marks_.entries) {
      if (e.prob == 0.0) continue;
      boxes.clear();
      for (const Needle& s : needles) {
        if (auto b = geometry::ContactBox(s, e.angle, e.half_length)) boxes.push_back(*b);
      }
      if (!boxes.empty()) exposure += e.prob * geometry::UnionAreaOfBoxes(boxes);
    }
    return -lambda_ * exposure;
  }

 private:
  Needle NeedleAt(int i, Vec2 c) const { return Needle{c, slots_[i].angle, slots_[i].half_length}; }

  double Kernel(int c, int p, const std::vector<Vec2>& pos) const {
    const Slot& sc = slots_[c];
    const Slot& sp = slots_[p];
    if (sc.angle != sp.angle) {
      const SkewBox box = *geometry::ContactBox(NeedleAt(p, pos[p]), sc.angle, sc.half_length);
      return box.Contains(pos[c]) ? 1.0 / box.Area() : 0.0;
    }
    const Vec2 d = pos[c] - pos[p];
    const Vec2 e = geometry::UnitVector(sc.angle);
    const double a = geometry::Dot(d, e);
    const double b = geometry::Cross(e, d);
    return 0.25 * sc.k_par * sc.k_perp *
           std::exp(-sc.k_par * std::fabs(a) - sc.k_perp * std::fabs(b));
  }

  bool Connected(const std::vector<Needle>& needles) const {
    std::vector<char> seen(m_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j = 0; j < m_; ++j) {
        if (!seen[j] && geometry::NeedlesIntersect(needles[i], needles[j])) {
          seen[j] = 1;
          ++reached;
          stack.push_back(j);
        }
      }
    }
    return reached == m_;
  }

  double lambda_;
  MarkLaw marks_;
  Proposal proposal_;
  std::vector<Slot> slots_;
  int m_ = 0;
  double box_half_ = 1.0;
  double log_fact_ = 0.0;
};

void CheckQuery(const CompositionQuery& q) {
  if (q.kvec.size() != q.marks.size()) {
    throw std::invalid_argument("composition length must match the mark law");
  }
  for (int k : q.kvec) {
    if (k < 0) throw std::invalid_argument("composition entries must be >= 0");
  }
  if (q.m() < 1) throw std::invalid_argument("composition must contain a needle");
  if (q.m() > 6) throw std::invalid_argument("integrator supports at most 6 needles");
  if (!(q.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
}

// Moves the sums to a larger log scale.
void Rescale(WeightedMoments& w, double log_scale) {
  if (w.log_scale == log_scale) return;
  const double f = w.log_scale == kNegInf ? 0.0 : std::exp(w.log_scale - log_scale);
  w.sum_w *= f;
  w.sum_w2 *= f * f;
  for (auto& v : w.sum_ws) v *= f;
  for (auto& v : w.sum_w2s) v *= f * f;
  for (auto& v : w.sum_w2s2) v *= f * f;
  w.log_scale = log_scale;
}

WeightedMoments EmptyMoments(int n_stats) {
  WeightedMoments w;
  w.log_scale = kNegInf;
  w.sum_ws.assign(n_stats, 0.0);
  w.sum_w2s.assign(n_stats, 0.0);
  w.sum_w2s2.assign(n_stats, 0.0);
  return w;
}

bool SingleOrientation(const CompositionQuery& q) {
  return std::count_if(q.kvec.begin(), q.kvec.end(), [](int k) { return k > 0; }) == 1;
}

}  // namespace

std::string ToString(Proposal p) {
  return p == Proposal::kContactTree ? "contact-tree" : "uniform-box";
}

int CompositionQuery::m() const { return std::accumulate(kvec.begin(), kvec.end(), 0); }

WeightedMoments IntegrateMoments(const CompositionQuery& q, const IntegrateOptions& opts,
                                 int n_stats, const SampleStatistic& stat) {
  CheckQuery(q);
  if (opts.budget < kMinBudget) throw std::invalid_argument("budget must be >= 1000");
  WeightedMoments total = EmptyMoments(n_stats);
  total.samples = opts.budget;
  if (q.m() >= 2 && SingleOrientation(q)) return total;

  const Integrand f(q, opts);
  const std::int64_t batches = (opts.budget + kBatch - 1) / kBatch;
  std::vector<WeightedMoments> parts(batches);
  process::ParallelFor(batches, opts.threads, [&](std::int64_t b) {
    WeightedMoments& w = parts[b];
    w = EmptyMoments(n_stats);
    std::mt19937_64 rng(process::StreamSeed(opts.seed, static_cast<std::uint64_t>(b)));
    const std::int64_t n = std::min(kBatch, opts.budget - b * kBatch);
    std::vector<Vec2> pos;
    std::vector<Needle> needles;
    std::vector<double> s(n_stats, 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
      f.Draw(rng, pos);
      f.Needles(pos, needles);
      ++w.samples;
      const double lv = f.LogValue(needles);
      if (lv == kNegInf) continue;
      ++w.hits;
      const double lw = lv - std::log(f.Density(pos));
      if (lw > w.log_scale) Rescale(w, lw);
      const double weight = std::exp(lw - w.log_scale);
      w.sum_w += weight;
      w.sum_w2 += weight * weight;
      if (n_stats > 0) {
        std::fill(s.begin(), s.end(), 0.0);
        stat(needles, s);
        for (int j = 0; j < n_stats; ++j) {
          w.sum_ws[j] += weight * s[j];
          w.sum_w2s[j] += weight * weight * s[j];
          w.sum_w2s2[j] += weight * weight * s[j] * s[j];
        }
      }
    }
  });
  total.samples = 0;
  for (const auto& w : parts) total.log_scale = std::max(total.log_scale, w.log_scale);
  if (total.log_scale == kNegInf) total.log_scale = 0.0;
  for (auto& w : parts) {
    Rescale(w, total.log_scale);
    total.samples += w.samples;
    total.hits += w.hits;
    total.sum_w += w.sum_w;
    total.sum_w2 += w.sum_w2;
    for (int j = 0; j < n_stats; ++j) {
      total.sum_ws[j] += w.sum_ws[j];
      total.sum_w2s[j] += w.sum_w2s[j];
      total.sum_w2s2[j] += w.sum_w2s2[j];
    }
  }
  return total;
}

IntegralEstimate IntegrateF(const CompositionQuery& q, const IntegrateOptions& opts) {
  CheckQuery(q);
  IntegralEstimate out;
  out.proposal = ToString(opts.proposal);
  if (q.m() >= 2 && SingleOrientation(q)) {
    // Parallel needles meet only on a null set.
    out.samples = 0;
    return out;
  }
  const WeightedMoments w = IntegrateMoments(q, opts, 0, {});
  const double n = static_cast<double>(w.samples);
  out.samples = w.samples;
  out.hits = w.hits;
  const double mean = w.sum_w / n;
  const double se = std::sqrt(std::max(0.0, w.sum_w2 / n - mean * mean) / (n - 1.0));
  if (mean > 0.0) {
    out.log_value = w.log_scale + std::log(mean);
    out.rel_error = se / mean;
  }
  const double scale = std::exp(w.log_scale);
  out.value = scale * mean;
  out.std_error = scale * se;
  return out;
}

double LogMuPrefactor(const CompositionQuery& q) {
  double v = (q.m() - 1) * std::log(q.lambda) + std::log(static_cast<double>(q.m()));
  for (std::size_t j = 0; j < q.kvec.size(); ++j) {
    const int k = q.kvec[j];
    if (k == 0) continue;
    const double p = q.marks.entries[j].prob;
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    v += k * std::log(p) - std::lgamma(k + 1.0);
  }
  return v;
}

Estimate MuEstimate(const CompositionQuery& q, const IntegrateOptions& opts) {
  const IntegralEstimate f = IntegrateF(q, opts);
  Estimate out;
  out.log_value = LogMuPrefactor(q) + f.log_value;
  out.rel_error = f.rel_error;
  out.value = std::exp(out.log_value);
  out.std_error = out.value * f.rel_error;
  return out;
}

std::vector<Composition> CompositionsOf(int m, int d) {
  std::vector<Composition> out;
  Composition k(d, 0);
  std::function<void(int, int)> rec = [&](int j, int left) {
    if (j == d - 1) {
      k[j] = left;
      out.push_back(k);
      return;
    }
    for (int c = left; c >= 0; --c) {
      k[j] = c;
      rec(j + 1, left - c);
    }
  };
  if (d >= 1) rec(0, m);
  std::sort(out.begin(), out.end());
  return out;
}

ConditionalLaw ConditionalComposition(double lambda, int m, const MarkLaw& marks,
                                      std::int64_t budget, std::uint64_t seed, int threads) {
  if (m < 1 || m > 5) throw std::invalid_argument("conditional composition needs 1 <= m <= 5");
  ConditionalLaw law;
  const std::vector<Composition> ks = CompositionsOf(m, static_cast<int>(marks.size()));
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    CompositionQuery q{ks[i], lambda, marks};
    IntegrateOptions o;
    o.budget = budget;
    o.seed = process::StreamSeed(seed, i);
    o.threads = threads;
    law.mu[ks[i]] = MuEstimate(q, o);
    shift = std::max(shift, law.mu[ks[i]].log_value);
  }
  if (shift == -std::numeric_limits<double>::infinity()) {
    law.degenerate = true;
    for (const auto& k : ks) law.probs[k] = {};
    return law;
  }
  // Normalize relative to the largest term so that tiny mu values still work.
  std::map<Composition, double> v, sd;
  double total = 0.0;
  for (const auto& k : ks) {
    v[k] = std::exp(law.mu[k].log_value - shift);
    sd[k] = v[k] * law.mu[k].rel_error;
    total += v[k];
  }
  for (const auto& k : ks) {
    double var = 0.0;
    for (const auto& j : ks) {
      const double d = ((j == k ? total : 0.0) - v[k]) / (total * total);
      var += d * d * sd[j] * sd[j];
    }
    Estimate e;
    e.value = v[k] / total;
    e.std_error = std::sqrt(var);
    e.log_value = std::log(e.value);
    e.rel_error = e.value > 0.0 ? e.std_error / e.value : 0.0;
    law.probs[k] = e;
  }
  return law;
}

CompressionEstimate EstimateCompression(double lambda, int target_size, const MarkLaw& marks,
                                        std::int64_t budget, std::uint64_t seed, int threads) {
  if (marks.size() != 2) throw std::invalid_argument("compression estimate needs two entries");
  if (target_size < 2 || target_size > 6) {
    throw std::invalid_argument("compression estimate needs 2 <= target size <= 6");
  }
  const int minor = process::MinorityIndex(marks);
  constexpr int kStats = 17;  // hull area, then 16 bins
  const SampleStatistic stat = [&](std::span<const Needle> cluster, std::span<double> s) {
    std::vector<Vec2> pts;
    for (const Needle& n : cluster) {
      if (marks.IndexOfAngle(n.angle) == minor) pts.push_back(n.center);
    }
    s[0] = geometry::ConvexHullArea(pts);
    const int bin = process::UniformityBin(process::RelativeMinorityPosition(cluster, marks));
    if (bin >= 0) s[1 + bin] = 1.0;
  };

  struct Part {
    double c = 0.0;  // log weight first, then relative weight
    WeightedMoments w;
  };
  std::vector<Part> parts;
  std::uint64_t stream = 0;
  for (int k = 1; k < target_size; ++k) {
    const CompositionQuery q{{k, target_size - k}, lambda, marks};
    IntegrateOptions o;
    o.budget = budget;
    o.seed = process::StreamSeed(seed, stream++);
    o.threads = threads;
    WeightedMoments w = IntegrateMoments(q, o, kStats, stat);
    parts.push_back({LogMuPrefactor(q) + w.log_scale, std::move(w)});
  }
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& p : parts) shift = std::max(shift, p.c);
  for (auto& p : parts) p.c = std::exp(p.c - shift);

  CompressionEstimate out;
  out.lambda = lambda;
  double a = 0.0, b = 0.0, w2 = 0.0;
  std::array<double, 16> bins{};
  for (const auto& p : parts) {
    const double n = static_cast<double>(p.w.samples);
    a += p.c * p.w.sum_ws[0] / n;
    b += p.c * p.w.sum_w / n;
    w2 += p.c * p.c / (n * n) * p.w.sum_w2;
    for (int j = 0; j < 16; ++j) bins[j] += p.c * p.w.sum_ws[1 + j] / n;
  }
  if (b == 0.0) return out;
  out.mean_hull = a / b;
  double var = 0.0;
  for (const auto& p : parts) {
    const double n = static_cast<double>(p.w.samples);
    const double r = out.mean_hull;
    const double sq = p.w.sum_w2s2[0] - 2.0 * r * p.w.sum_w2s[0] + r * r * p.w.sum_w2;
    const double mean = (p.w.sum_ws[0] - r * p.w.sum_w) / n;
    var += p.c * p.c * std::max(0.0, sq / (n * n) - mean * mean / n);
  }
  out.hull_std_error = std::sqrt(var) / b;
  const double mass = std::accumulate(bins.begin(), bins.end(), 0.0);
  for (int j = 0; j < 16; ++j) out.bin_props[j] = mass > 0.0 ? bins[j] / mass : 0.0;
  out.n_eff = w2 > 0.0 ? b * b / w2 : 0.0;
  const process::ChiSquare chi = process::UniformChiSquare(out.bin_props, out.n_eff);
  out.chi_square = chi.statistic;
  out.p_value = chi.p_value;
  return out;
}

std::optional<Asymptotic> AsymptoticMu(const CompositionQuery& q, std::int64_t g_budget,
                                       std::uint64_t seed) {
  const auto& e = q.marks.entries;
  const int m = q.m();
  if (e.size() == 2) {
    if (q.kvec[0] < 1 || q.kvec[1] < 1) return std::nullopt;
    formulas::TwoStateParams p;
    p.alpha = e[1].angle - e[0].angle;
    p.r0 = e[0].half_length;
    p.r_alpha = e[1].half_length;
    p.p = e[0].prob;
    if (!(p.p > 0.0 && p.p < 1.0)) return std::nullopt;
    Asymptotic a;
    a.log_value = formulas::Thm21LogClusterProb(q.kvec[0], q.kvec[1], q.lambda, p);
    a.value = std::exp(a.log_value);
    a.phi = formulas::ContactArea(p);
    a.expected_slope = -(m - 3.0);
    return a;
  }
  if (e.size() == 3) {
    formulas::ThreeStateParams p;
    p.alpha = e[1].angle - e[0].angle;
    p.beta = e[2].angle - e[0].angle;
    p.r0 = e[0].half_length;
    p.r_alpha = e[1].half_length;
    p.r_beta = e[2].half_length;
    p.p0 = e[0].prob;
    p.p_alpha = e[1].prob;
    p.p_beta = e[2].prob;
    try {
      const formulas::PrefactorResult r = formulas::Thm22Prefactor(
          p, {q.kvec[0], q.kvec[1], q.kvec[2]}, q.lambda, g_budget, seed);
      Asymptotic a;
      a.value = r.value;
      a.log_value = r.log_value;
      a.phi = r.phi;
      switch (r.regime) {
        case formulas::AsymptoticCase::kOne: a.expected_slope = -(m - 3.0); break;
        case formulas::AsymptoticCase::kTwo: a.expected_slope = -(m - 2.5); break;
        case formulas::AsymptoticCase::kThree: a.expected_slope = -(m - 2.0); break;
      }
      return a;
    } catch (const UnsupportedRegimeError&) {
      return std::nullopt;
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::string CompositionLabel(const Composition& k) {
  std::string s;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) s += ':';
    s += std::to_string(k[i]);
  }
  return s;
}

ConvergenceRow MakeConvergenceRow(const CompositionQuery& q, const Estimate& mu,
                                  const std::optional<Asymptotic>& asymptotic) {
  ConvergenceRow row;
  row.lambda = q.lambda;
  row.composition = CompositionLabel(q.kvec);
  row.estimate = mu.value;
  row.std_error = mu.std_error;
  row.log_estimate = mu.log_value;
  if (std::isfinite(mu.log_value) && mu.rel_error > 0.0) {
    row.log_std_error = mu.log_value + std::log(mu.rel_error);
  }
  if (asymptotic) {
    row.asymptotic = asymptotic->value;
    row.log_asymptotic = asymptotic->log_value;
    if (std::isfinite(asymptotic->log_value) && std::isfinite(mu.log_value)) {
      row.ratio = std::exp(mu.log_value - asymptotic->log_value);
      row.ratio_std_error = row.ratio * mu.rel_error;
    }
  }
  return row;
}

ConvergenceTable ConvergenceStudy(std::span<const double> lambda_grid,
                                  std::span<const CompositionQuery> queries,
                                  std::int64_t budget, std::uint64_t seed, int threads) {
  if (lambda_grid.empty()) throw std::invalid_argument("lambda grid is empty");
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end())) {
    throw std::invalid_argument("lambda grid must be ascending");
  }
  ConvergenceTable table;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    std::vector<double> xs, ys;
    double expected = 0.0;
    for (std::size_t li = 0; li < lambda_grid.size(); ++li) {
      CompositionQuery q = queries[qi];
      q.lambda = lambda_grid[li];
      IntegrateOptions o;
      o.budget = budget;
      o.seed = process::StreamSeed(seed, qi * 4096 + li);
      o.threads = threads;
      const Estimate mu = MuEstimate(q, o);
      const std::optional<Asymptotic> a = AsymptoticMu(q, 200000, o.seed);
      const ConvergenceRow row = MakeConvergenceRow(q, mu, a);
      if (a) {
        expected = a->expected_slope;
        if (std::isfinite(mu.log_value)) {
          xs.push_back(std::log(q.lambda));
          ys.push_back(mu.log_value + q.lambda * a->phi);
        }
      }
      table.rows.push_back(row);
    }
    if (xs.size() >= 2) {
      const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
      const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
      }
      table.slopes.push_back({CompositionLabel(queries[qi].kvec), sxy / sxx, expected});
    }
  }
  return table;
}

CrossValidation CrossValidate(const process::SimConfig& config, int m, std::int64_t trials,
                              std::int64_t budget, std::uint64_t seed, int threads) {
  const process::CompositionHistogram hist =
      process::CompositionHistogramOf(config, trials, threads);
  const ConditionalLaw law =
      ConditionalComposition(config.lambda, m, config.marks, budget, seed, threads);
  const auto sim = hist.ConditionalOnSize(m);

  CrossValidation cv;
  cv.trials = hist.trials;
  cv.censored = hist.censored;
  cv.events = hist.EventsOfSize(m);
  cv.inconclusive = cv.events < 100;
  auto z_of = [](double a, double sa, double b, double sb) {
    const double den = std::sqrt(sa * sa + sb * sb);
    if (den == 0.0) return a == b ? 0.0 : std::numeric_limits<double>::infinity();
    return (a - b) / den;
  };
  for (const auto& [k, est] : law.probs) {
    CrossValidationRow row;
    row.k = k;
    if (const auto it = sim.find(k); it != sim.end()) {
      row.sim_prob = it->second.prob;
      row.sim_std_error = it->second.std_error;
    }
    row.int_prob = est.value;
    row.int_std_error = est.std_error;
    row.z = z_of(row.sim_prob, row.sim_std_error, row.int_prob, row.int_std_error);
    const process::ProbEstimate u = hist.Unconditional(k);
    row.sim_uncond = u.prob;
    row.sim_uncond_std_error = u.std_error;
    row.int_uncond = law.mu.at(k).value;
    row.int_uncond_std_error = law.mu.at(k).std_error;
    row.z_uncond =
        z_of(row.sim_uncond, row.sim_uncond_std_error, row.int_uncond, row.int_uncond_std_error);
    cv.rows.push_back(row);
  }
  return cv;
}

}  // namespace needleperc::estimation
