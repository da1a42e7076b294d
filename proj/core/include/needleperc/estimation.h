#ifndef NEEDLEPERC_ESTIMATION_H_
#define NEEDLEPERC_ESTIMATION_H_

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "needleperc/formulas.h"
#include "needleperc/process.h"

namespace needleperc::estimation {

using formulas::MarkLaw;
using geometry::Needle;
using process::Composition;

enum class Proposal {
  // Each free needle attaches to a uniformly chosen earlier needle: uniform
  // in its contact box when the orientations differ, a Laplace offset when
  // they agree. The density is averaged over all placement orders.
  kContactTree,
  // Every free center uniform in the square of half-width equal to the sum
  // of all full lengths.
  kUniformBox,
};
std::string ToString(Proposal p);

struct IntegralEstimate {
  double value = 0.0;
  double std_error = 0.0;
  // log of value, finite even where value underflows; -inf for a zero estimate
  double log_value = -std::numeric_limits<double>::infinity();
  double rel_error = 0.0;  // std_error / value
  std::int64_t samples = 0;
  std::int64_t hits = 0;  // samples with a connected configuration
  std::string proposal;
};

struct CompositionQuery {
  Composition kvec;  // count per mark-law entry
  double lambda = 1.0;
  MarkLaw marks;

  int m() const;
};

struct IntegrateOptions {
  std::int64_t budget = 100000;
  std::uint64_t seed = 1;
  Proposal proposal = Proposal::kContactTree;
  int threads = 1;
  // Half-width override for kUniformBox; 0 selects the default.
  double box_half_width = 0.0;
};

// F_lambda(k): integral over the free centers of the connectivity indicator
// times the vacancy weight exp(-lambda sum_j p_j |neighbourhood_j|).
IntegralEstimate IntegrateF(const CompositionQuery& q, const IntegrateOptions& opts);

// log of lambda^{m-1} m prod_j p_j^{k_j} / k_j!.
double LogMuPrefactor(const CompositionQuery& q);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  double log_value = -std::numeric_limits<double>::infinity();
  double rel_error = 0.0;
};

// mu(C0 in Lambda(k) | Gamma0) = prefactor * F.
Estimate MuEstimate(const CompositionQuery& q, const IntegrateOptions& opts);

// Every composition of m over the law's entries, in lexicographic order.
std::vector<Composition> CompositionsOf(int m, int d);

struct ConditionalLaw {
  std::map<Composition, Estimate> probs;  // normalized over the size-m shell
  std::map<Composition, Estimate> mu;     // unnormalized values
  bool degenerate = false;                // every mu is zero
};

// Composition k uses seed StreamSeed(seed, index of k).
ConditionalLaw ConditionalComposition(double lambda, int m, const MarkLaw& marks,
                                      std::int64_t budget, std::uint64_t seed,
                                      int threads = 1);

// Integrand moments of per-sample statistics for one composition: with
// weights w_i, sums of w, w^2, w s, w^2 s, w^2 s^2 for each statistic.
struct WeightedMoments {
  std::int64_t samples = 0;
  std::int64_t hits = 0;
  // Stored weights are exp(-log_scale) times the true ones.
  double log_scale = 0.0;
  double sum_w = 0.0;
  double sum_w2 = 0.0;
  std::vector<double> sum_ws;
  std::vector<double> sum_w2s;
  std::vector<double> sum_w2s2;
};

// Writes n statistics for a connected configuration (origin needle first).
using SampleStatistic = std::function<void(std::span<const Needle>, std::span<double>)>;

WeightedMoments IntegrateMoments(const CompositionQuery& q, const IntegrateOptions& opts,
                                 int n_stats, const SampleStatistic& stat);

struct CompressionEstimate {
  double lambda = 0.0;
  double mean_hull = 0.0;
  double hull_std_error = 0.0;
  std::array<double, 16> bin_props{};  // relative minority position
  double n_eff = 0.0;
  double chi_square = 0.0;
  double p_value = 1.0;
};

// Weighted counterpart of process::CompressionStats computed from the
// integral representation: averages over clusters of size target_size with
// weights mu(Lambda(k) | Gamma0). Needs a two-entry law.
CompressionEstimate EstimateCompression(double lambda, int target_size, const MarkLaw& marks,
                                        std::int64_t budget, std::uint64_t seed,
                                        int threads = 1);

// Closed-form asymptotic value of mu for the query when one is available:
// two-entry laws (any composition) and three-entry laws with exactly one
// empty orientation.
struct Asymptotic {
  double value = 0.0;
  double log_value = 0.0;
  double phi = 0.0;             // exponential rate
  double expected_slope = 0.0;  // power of lambda in mu * exp(lambda phi)
};
std::optional<Asymptotic> AsymptoticMu(const CompositionQuery& q, std::int64_t g_budget = 200000,
                                       std::uint64_t seed = 1);

struct ConvergenceRow {
  double lambda = 0.0;
  std::string composition;
  double estimate = 0.0;
  double std_error = 0.0;
  double asymptotic = 0.0;
  double ratio = 0.0;
  double ratio_std_error = 0.0;
  // Natural logs, finite where estimate or asymptotic underflow.
  double log_estimate = -std::numeric_limits<double>::infinity();
  double log_std_error = -std::numeric_limits<double>::infinity();
  double log_asymptotic = -std::numeric_limits<double>::infinity();
};

// One table row for an estimate of mu at q and its asymptotic value, if any.
ConvergenceRow MakeConvergenceRow(const CompositionQuery& q, const Estimate& mu,
                                  const std::optional<Asymptotic>& asymptotic);

struct SlopeDiagnostic {
  std::string composition;
  double fitted_slope = 0.0;
  double expected_slope = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<SlopeDiagnostic> slopes;
};

// Queries are evaluated at every grid point (their own lambda is ignored).
ConvergenceTable ConvergenceStudy(std::span<const double> lambda_grid,
                                  std::span<const CompositionQuery> queries,
                                  std::int64_t budget, std::uint64_t seed, int threads = 1);

std::string CompositionLabel(const Composition& k);

struct CrossValidationRow {
  Composition k;
  double sim_prob = 0.0, sim_std_error = 0.0;
  double int_prob = 0.0, int_std_error = 0.0;
  double z = 0.0;
  double sim_uncond = 0.0, sim_uncond_std_error = 0.0;
  double int_uncond = 0.0, int_uncond_std_error = 0.0;
  double z_uncond = 0.0;
};

struct CrossValidation {
  std::vector<CrossValidationRow> rows;
  std::int64_t events = 0;  // uncensored simulated clusters of size m
  std::int64_t trials = 0;
  std::int64_t censored = 0;
  bool inconclusive = false;  // fewer than 100 events
};

CrossValidation CrossValidate(const process::SimConfig& config, int m, std::int64_t trials,
                              std::int64_t budget, std::uint64_t seed, int threads = 1);

}  // namespace needleperc::estimation

#endif  // NEEDLEPERC_ESTIMATION_H_
