#include "commands.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "needleperc/errors.h"
#include "needleperc/geometry.h"
#include "output.h"
#include "svg.h"

namespace needleperc::app {
namespace {

using estimation::Composition;
using estimation::CompositionLabel;
using geometry::Needle;

class Timer {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::uint64_t SeedOf(const Fields& f, const Invocation& inv) {
  const std::int64_t s = f.Integer("seed", 1);
  if (s < 0) throw UsageError(f.Path("seed") + " must be >= 0");
  return inv.seed ? *inv.seed : static_cast<std::uint64_t>(s);
}

std::int64_t Positive(const Fields& f, const std::string& key, std::int64_t fallback) {
  const std::int64_t v = f.Integer(key, fallback);
  if (v < 1) throw UsageError(f.Path(key) + " must be >= 1");
  return v;
}

std::vector<double> LambdaGrid(const Fields& f) {
  std::vector<double> grid;
  if (f.Has("lambdas")) {
    grid = f.Numbers("lambdas");
  } else if (f.Has("lambda")) {
    grid = {f.Number("lambda")};
  } else {
    throw UsageError("missing key " + f.Path("lambdas"));
  }
  if (grid.empty()) throw UsageError(f.Path("lambdas") + " must not be empty");
  for (double l : grid) {
    if (!(l > 0.0)) throw UsageError(f.Path("lambdas") + " entries must be positive");
  }
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw UsageError(f.Path("lambdas") + " must be ascending");
  }
  return grid;
}

std::string SurvivorText(const formulas::RegimeVerdict& v) {
  std::string s;
  for (const auto& [y, z] : v.survivors) {
    if (!s.empty()) s += ' ';
    s += "A(" + formulas::ToString(y) + "," + formulas::ToString(z) + ")";
  }
  return s;
}

Json VerdictJson(const formulas::ThreeStateParams& p, const formulas::RegimeVerdict& v) {
  const formulas::ParamsH h = formulas::DeriveH(p);
  Json survivors = Json::array();
  for (const auto& [y, z] : v.survivors) {
    survivors.push_back(formulas::ToString(y) + "," + formulas::ToString(z));
  }
  Json out = {
      {"survivors", survivors},
      {"fixation", v.fixation},
      {"pinned_one_coordinate", v.pinned_one_coordinate},
      {"case_label", v.case_label},
      {"rates", {{"absent_0", v.rates[0]}, {"absent_alpha", v.rates[1]},
                 {"absent_beta", v.rates[2]}}},
      {"h", {{"c", h.c}, {"h0", h.h0}, {"h_alpha", h.h_alpha}, {"h_beta", h.h_beta},
             {"a", h.a}, {"b", h.b}}},
      {"thresholds", {{"l1", formulas::ThresholdL1(p.p0, p.p_alpha, p.p_beta)},
                      {"l2", formulas::ThresholdL2(p.p0, p.p_alpha, p.p_beta)}}},
  };
  if (v.case_label == "reduced") {
    out["reduced_label"] = v.reduced_label;
    Json roles = Json::array();
    for (auto o : v.roles) roles.push_back(formulas::ToString(o));
    out["roles"] = roles;
  }
  return out;
}

// Snapshot of one Palm realization: every sampled needle, the origin cluster
// highlighted, and the window outline.
std::string SnapshotSvg(const process::SimConfig& cfg) {
  const std::vector<Needle> needles = process::PalmSample(cfg);
  const std::vector<int> labels = process::BuildClusters(needles);
  const double w = cfg.window.half_width, h = cfg.window.half_height;
  const double side = 640.0;
  Plot plot(-w, w, -h, h, side, side * h / w);
  plot.Axes("Palm sample, origin cluster in red", "x1", "x2");
  for (std::size_t i = 0; i < needles.size(); ++i) {
    const geometry::Segment s = geometry::Endpoints(needles[i]);
    const bool origin = labels[i] == labels[0];
    plot.Segment(s.a.x1, s.a.x2, s.b.x1, s.b.x2, origin ? "#d62728" : "#7f7f7f",
                 origin ? 1.6 : 0.6, "needle");
  }
  return plot.str();
}

std::string CompositionsText(const Composition& k) { return CompositionLabel(k); }

}  // namespace

void RunConfig(const Invocation& inv, std::ostream& log) {
  if (!inv.config.is_object() || !inv.config.contains("subcommand") ||
      !inv.config["subcommand"].is_string()) {
    throw UsageError("config needs a string \"subcommand\"");
  }
  const std::string sub = inv.config["subcommand"].get<std::string>();
  if (sub == "simulate") return RunSimulate(inv, log);
  if (sub == "integrate") return RunIntegrate(inv, log);
  if (sub == "convergence") return RunConvergence(inv, log);
  if (sub == "classify") return RunClassify(inv, log);
  if (sub == "phase-diagram") return RunPhaseDiagram(inv, log);
  throw UsageError("unknown subcommand \"" + sub + "\"");
}

void RunSimulate(const Invocation& inv, std::ostream& log) {
  const Timer timer;
  const Fields f(inv.config, "config");
  f.String("subcommand");
  process::SimConfig cfg;
  cfg.marks = ParseMarks(f.Raw("marks"), f.Path("marks"));
  cfg.lambda = f.Number("lambda");
  if (!(cfg.lambda > 0.0)) throw UsageError(f.Path("lambda") + " must be positive");
  cfg.seed = SeedOf(f, inv);
  const std::int64_t trials = Positive(f, "trials", 10000);
  cfg.max_needles = Positive(f, "max_needles", cfg.max_needles);
  cfg.window = process::DefaultWindow(cfg.marks, cfg.lambda);
  if (f.Has("window")) {
    const Fields w(f.Raw("window"), f.Path("window"));
    cfg.window.half_width = w.Number("half_width");
    cfg.window.half_height = w.Number("half_height");
    w.Finish();
  }
  int target = 0;
  if (f.Has("compression")) {
    const Fields c(f.Raw("compression"), f.Path("compression"));
    target = static_cast<int>(c.Integer("target_size"));
    c.Finish();
    if (cfg.marks.size() != 2) throw UsageError("compression needs a two-entry mark law");
    if (target < 2) throw UsageError("compression target_size must be >= 2");
  }
  const bool snapshot = f.Bool("snapshot", true);
  f.Finish();
  try {
    process::Validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  RunOutput out(inv.out_dir);
  const process::CompositionHistogram hist =
      process::CompositionHistogramOf(cfg, trials, inv.threads);
  Csv csv({"composition", "size", "count", "probability", "stderr", "conditional",
           "conditional_stderr"});
  std::map<int, std::map<Composition, process::ProbEstimate>> cond;
  for (const auto& [k, n] : hist.counts) {
    const int m = std::accumulate(k.begin(), k.end(), 0);
    if (!cond.count(m)) cond[m] = hist.ConditionalOnSize(m);
    const process::ProbEstimate u = hist.Unconditional(k);
    const process::ProbEstimate c = cond[m].at(k);
    csv.Row({CompositionsText(k), Num(std::int64_t{m}), Num(n), Num(u.prob), Num(u.std_error),
             Num(c.prob), Num(c.std_error)});
  }
  out.Add("histogram.csv", csv.str());
  log << "simulate: " << hist.trials << " trials, " << hist.censored << " censored\n";

  if (target > 0) {
    const process::CompressionSummary s =
        process::CompressionStats(cfg, trials, target, inv.threads);
    std::vector<double> props(16, 0.0);
    for (int j = 0; j < 16; ++j) {
      props[j] = s.events > 0 ? static_cast<double>(s.bins[j]) / s.events : 0.0;
    }
    const process::ChiSquare chi =
        process::UniformChiSquare(props, static_cast<double>(s.events));
    Csv c({"lambda", "target_size", "trials", "events", "mean_hull", "hull_stderr",
           "chi_square", "p_value"});
    c.Row({Num(s.lambda), Num(std::int64_t{target}), Num(s.trials), Num(s.events),
           Num(s.mean_hull), Num(s.hull_std_error), Num(chi.statistic), Num(chi.p_value)});
    out.Add("compression.csv", c.str());
  }
  if (snapshot) {
    process::SimConfig one = cfg;
    one.seed = process::StreamSeed(cfg.seed, 0);
    out.Add("snapshot.svg", SnapshotSvg(one));
  }
  out.Commit(inv.config, cfg.seed, timer.Seconds());
}

namespace {

struct EstimationSetup {
  formulas::MarkLaw marks;
  std::vector<double> lambdas;
  std::vector<Composition> compositions;
  std::int64_t budget = 100000;
  std::uint64_t seed = 1;
  estimation::Proposal proposal = estimation::Proposal::kContactTree;
};

EstimationSetup ParseEstimation(const Fields& f, const Invocation& inv) {
  EstimationSetup s;
  s.marks = ParseMarks(f.Raw("marks"), f.Path("marks"));
  s.lambdas = LambdaGrid(f);
  s.compositions =
      ParseCompositions(f.Raw("compositions"), f.Path("compositions"), s.marks.size());
  for (const auto& k : s.compositions) {
    const int m = std::accumulate(k.begin(), k.end(), 0);
    if (m < 1 || m > 6) throw UsageError("composition sizes must lie in [1, 6]");
  }
  s.budget = Positive(f, "budget", s.budget);
  if (s.budget < 1000) throw UsageError(f.Path("budget") + " must be >= 1000");
  s.seed = SeedOf(f, inv);
  const std::string prop = f.String("proposal", "contact-tree");
  if (prop == "uniform-box") {
    s.proposal = estimation::Proposal::kUniformBox;
  } else if (prop != "contact-tree") {
    throw UsageError(f.Path("proposal") + " must be \"contact-tree\" or \"uniform-box\"");
  }
  return s;
}

const std::vector<std::string> kRatioHeader = {"lambda",   "composition", "estimate",
                                               "stderr",   "asymptotic",  "ratio"};

std::string ConvergenceSvg(const estimation::ConvergenceTable& t) {
  double lo = 1.0, hi = 1.0;
  std::map<std::string, std::vector<const estimation::ConvergenceRow*>> by;
  for (const auto& r : t.rows) {
    if (r.ratio <= 0.0) continue;
    by[r.composition].push_back(&r);
    lo = std::min(lo, r.ratio - r.ratio_std_error);
    hi = std::max(hi, r.ratio + r.ratio_std_error);
  }
  double lmin = t.rows.empty() ? 1.0 : t.rows.front().lambda, lmax = lmin;
  for (const auto& r : t.rows) {
    lmin = std::min(lmin, r.lambda);
    lmax = std::max(lmax, r.lambda);
  }
  const double pad = 0.05 * (hi - lo + 0.1);
  Plot plot(std::log(lmin) - 0.1, std::log(lmax) + 0.1, lo - pad, hi + pad);
  plot.Axes("integrator / asymptotic", "log lambda", "ratio");
  plot.HLine(1.0, "black");
  std::vector<std::pair<std::string, std::string>> legend;
  std::size_t i = 0;
  for (const auto& [label, rows] : by) {
    const std::string& color = PaletteColor(i++);
    std::vector<std::pair<double, double>> pts;
    for (const auto* r : rows) {
      pts.emplace_back(std::log(r->lambda), r->ratio);
      plot.ErrorBar(std::log(r->lambda), r->ratio - r->ratio_std_error,
                    r->ratio + r->ratio_std_error, color);
    }
    plot.Series(pts, color);
    plot.Points(pts, color);
    legend.emplace_back(label, color);
  }
  plot.Legend(legend);
  return plot.str();
}

void AddRatioRow(Csv& csv, const estimation::ConvergenceRow& r) {
  const bool has = std::isfinite(r.log_asymptotic);
  csv.Row({Num(r.lambda), r.composition, NumWithLog(r.estimate, r.log_estimate),
           NumWithLog(r.std_error, r.log_std_error),
           has ? NumWithLog(r.asymptotic, r.log_asymptotic) : "", has ? Num(r.ratio) : ""});
}

}  // namespace

void RunIntegrate(const Invocation& inv, std::ostream& log) {
  const Timer timer;
  const Fields f(inv.config, "config");
  f.String("subcommand");
  const EstimationSetup s = ParseEstimation(f, inv);
  const int cond_m = static_cast<int>(f.Integer("conditional_size", 0));
  if (cond_m < 0 || cond_m > 5) throw UsageError("conditional_size must lie in [1, 5]");
  f.Finish();

  RunOutput out(inv.out_dir);
  Csv csv(kRatioHeader);
  for (std::size_t li = 0; li < s.lambdas.size(); ++li) {
    for (std::size_t qi = 0; qi < s.compositions.size(); ++qi) {
      const estimation::CompositionQuery q{s.compositions[qi], s.lambdas[li], s.marks};
      estimation::IntegrateOptions o;
      o.budget = s.budget;
      o.seed = process::StreamSeed(s.seed, qi * 4096 + li);
      o.threads = inv.threads;
      o.proposal = s.proposal;
      const estimation::Estimate mu = estimation::MuEstimate(q, o);
      AddRatioRow(csv, estimation::MakeConvergenceRow(
                           q, mu, estimation::AsymptoticMu(q, 200000, o.seed)));
    }
  }
  out.Add("integrate.csv", csv.str());
  if (cond_m > 0) {
    Csv c({"lambda", "composition", "probability", "stderr"});
    for (std::size_t li = 0; li < s.lambdas.size(); ++li) {
      const estimation::ConditionalLaw law = estimation::ConditionalComposition(
          s.lambdas[li], cond_m, s.marks, s.budget, process::StreamSeed(s.seed, 1u << 20 | li),
          inv.threads);
      for (const auto& [k, e] : law.probs) {
        c.Row({Num(s.lambdas[li]), CompositionLabel(k), Num(e.value), Num(e.std_error)});
      }
    }
    out.Add("conditional.csv", c.str());
  }
  log << "integrate: " << s.lambdas.size() * s.compositions.size() << " estimates\n";
  out.Commit(inv.config, s.seed, timer.Seconds());
}

void RunConvergence(const Invocation& inv, std::ostream& log) {
  const Timer timer;
  const Fields f(inv.config, "config");
  f.String("subcommand");
  const EstimationSetup s = ParseEstimation(f, inv);
  f.Finish();
  if (s.proposal != estimation::Proposal::kContactTree) {
    throw UsageError("convergence runs use the contact-tree proposal");
  }
  std::vector<estimation::CompositionQuery> qs;
  for (const auto& k : s.compositions) qs.push_back({k, s.lambdas.front(), s.marks});
  const estimation::ConvergenceTable t =
      estimation::ConvergenceStudy(s.lambdas, qs, s.budget, s.seed, inv.threads);

  RunOutput out(inv.out_dir);
  Csv csv(kRatioHeader);
  for (const auto& r : t.rows) AddRatioRow(csv, r);
  out.Add("convergence.csv", csv.str());
  Csv slopes({"composition", "fitted_slope", "expected_slope"});
  for (const auto& d : t.slopes) {
    slopes.Row({d.composition, Num(d.fitted_slope), Num(d.expected_slope)});
  }
  out.Add("slopes.csv", slopes.str());
  out.Add("convergence.svg", ConvergenceSvg(t));
  log << "convergence: " << t.rows.size() << " rows\n";
  out.Commit(inv.config, s.seed, timer.Seconds());
}

void RunClassify(const Invocation& inv, std::ostream& log) {
  const Timer timer;
  const Fields f(inv.config, "config");
  f.String("subcommand");
  const formulas::ThreeStateParams p = ParseThreeState(f.Raw("params"), f.Path("params"));
  const double tol = f.Number("tie_tol", 1e-9);
  if (!(tol >= 0.0)) throw UsageError(f.Path("tie_tol") + " must be >= 0");
  f.Finish();
  const formulas::RegimeVerdict v = formulas::ClassifyRegime(p, tol);
  RunOutput out(inv.out_dir);
  out.Add("verdict.json", VerdictJson(p, v).dump(2) + "\n");
  log << "classify: " << SurvivorText(v) << (v.fixation ? ", fixation" : "") << "\n";
  out.Commit(inv.config, 0, timer.Seconds());
}

namespace {

struct Axis {
  double lo = 0.0, hi = 1.0;
  int n = 2;
  double At(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
  double Step() const { return n == 1 ? 1.0 : (hi - lo) / (n - 1); }
};

Axis ParseAxis(const Fields& f, const std::string& key) {
  const std::vector<double> v = f.Numbers(key);
  if (v.size() != 3 || v[2] < 1 || v[2] != std::floor(v[2]) || !(v[1] >= v[0])) {
    throw UsageError(f.Path(key) + " must be [min, max, count] with max >= min");
  }
  return {v[0], v[1], static_cast<int>(v[2])};
}

// The threshold curve in the (p0, a) plane: l1 while l1 <= 1, else l2.
double BoundaryA(double p0, double pa, double pb) {
  const double l1 = formulas::ThresholdL1(p0, pa, pb);
  return l1 <= 1.0 ? l1 : formulas::ThresholdL2(p0, pa, pb);
}

}  // namespace

void RunPhaseDiagram(const Invocation& inv, std::ostream& log) {
  const Timer timer;
  const Fields f(inv.config, "config");
  f.String("subcommand");
  const std::string unit = f.String("angle_unit");
  double scale = 1.0;
  if (unit == "degrees") {
    scale = geometry::kPi / 180.0;
  } else if (unit != "radians") {
    throw UsageError(f.Path("angle_unit") + " must be \"degrees\" or \"radians\"");
  }
  const double alpha = f.Number("alpha") * scale;
  const double beta = f.Number("beta") * scale;
  const std::string sweep = f.String("sweep");
  const double tol = f.Number("tie_tol", 1e-9);
  Axis xa, ya;
  double share = 0.0;
  std::vector<double> p;
  if (sweep == "a-p0") {
    xa = ParseAxis(f, "p0");
    ya = ParseAxis(f, "a");
    share = f.Number("p_alpha_share", 0.4);
    if (!(share > 0.0 && share < 1.0)) throw UsageError("p_alpha_share must lie in (0, 1)");
    if (!(xa.lo >= 0.0 && xa.hi < 1.0)) throw UsageError("p0 range must lie in [0, 1)");
  } else if (sweep == "a-b") {
    xa = ParseAxis(f, "a");
    ya = ParseAxis(f, "b");
    p = f.Numbers("p");
    if (p.size() != 3) throw UsageError(f.Path("p") + " needs three entries");
  } else {
    throw UsageError(f.Path("sweep") + " must be \"a-p0\" or \"a-b\"");
  }
  if (!(ya.lo > 0.0) || (sweep == "a-b" && !(xa.lo > 0.0))) {
    throw UsageError("length ratios must be positive");
  }
  f.Finish();

  Csv csv({"a", "b", "p0", "p_alpha", "p_beta", "survivors", "fixation", "case_label"});
  std::map<std::string, std::size_t> colors;
  Plot plot(xa.lo - 0.5 * xa.Step(), xa.hi + 0.5 * xa.Step(), ya.lo - 0.5 * ya.Step(),
            ya.hi + 0.5 * ya.Step());
  for (int iy = 0; iy < ya.n; ++iy) {
    for (int ix = 0; ix < xa.n; ++ix) {
      double a, b, p0, pa, pb;
      if (sweep == "a-p0") {
        p0 = xa.At(ix);
        a = b = ya.At(iy);
        pa = (1.0 - p0) * share;
        pb = 1.0 - p0 - pa;
      } else {
        a = xa.At(ix);
        b = ya.At(iy);
        p0 = p[0], pa = p[1], pb = p[2];
      }
      formulas::ThreeStateParams params;
      try {
        params = formulas::FromH(alpha, beta, 1.0, a, b, p0, pa, pb);
        formulas::Validate(params);
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("sweep point rejected: ") + e.what());
      }
      const formulas::RegimeVerdict v = formulas::ClassifyRegime(params, tol);
      const std::string key = SurvivorText(v) + (v.fixation ? " fixation" : "");
      if (!colors.count(key)) colors.emplace(key, colors.size());
      const double x = xa.At(ix), y = ya.At(iy);
      plot.Cell(x - 0.5 * xa.Step(), x + 0.5 * xa.Step(), y - 0.5 * ya.Step(),
                y + 0.5 * ya.Step(), PaletteColor(colors[key]));
      csv.Row({Num(a), Num(b), Num(p0), Num(pa), Num(pb), SurvivorText(v),
               v.fixation ? "1" : "0", v.case_label});
    }
  }
  RunOutput out(inv.out_dir);
  out.Add("phase.csv", csv.str());
  if (sweep == "a-p0") {
    Csv bc({"p0", "a_boundary"});
    std::vector<std::pair<double, double>> curve;
    const int n = 200;
    for (int i = 0; i <= n; ++i) {
      const double p0 = xa.lo + (xa.hi - xa.lo) * i / n;
      const double pa = (1.0 - p0) * share;
      const double a = BoundaryA(p0, pa, 1.0 - p0 - pa);
      bc.Row({Num(p0), Num(a)});
      if (a >= ya.lo - 0.5 * ya.Step() && a <= ya.hi + 0.5 * ya.Step()) curve.emplace_back(p0, a);
    }
    out.Add("boundary.csv", bc.str());
    plot.Curve(curve, "black", 2.0);
    plot.Axes("regimes at a = b", "p0", "a");
  } else {
    plot.Axes("regimes", "a", "b");
  }
  std::vector<std::pair<std::string, std::string>> legend(colors.size());
  for (const auto& [key, idx] : colors) legend[idx] = {key, PaletteColor(idx)};
  plot.Legend(legend);
  out.Add("phase.svg", plot.str());
  log << "phase-diagram: " << xa.n * ya.n << " points, " << colors.size() << " regions\n";
  out.Commit(inv.config, 0, timer.Seconds());
}

}  // namespace needleperc::app
