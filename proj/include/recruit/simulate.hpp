#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "recruit/model.hpp"
#include "recruit/predict.hpp"
#include "recruit/rng.hpp"

namespace recruit {

/// Distribution of the centre rates in a simulated trial.
struct RatePrior {
  enum class Kind { SingleGamma, GammaMixture };
  Kind kind = Kind::SingleGamma;
  double alpha = 2.0;
  double beta = 150.0;
  double beta2 = 450.0;  ///< second component rate, mixture only (equal weights)

  static RatePrior single(double alpha, double beta) { return {Kind::SingleGamma, alpha, beta, beta}; }
  static RatePrior mixture(double alpha, double beta1, double beta2) {
    return {Kind::GammaMixture, alpha, beta1, beta2};
  }
  double mean() const;
};

struct OpeningSchedule {
  enum class Kind { Simultaneous, UniformOnCensus, SplitHalf, Explicit };
  Kind kind = Kind::Simultaneous;
  std::vector<double> opening_times;  ///< Explicit only, one per centre

  static OpeningSchedule simultaneous() { return {Kind::Simultaneous, {}}; }
  static OpeningSchedule uniform() { return {Kind::UniformOnCensus, {}}; }
  static OpeningSchedule split_half() { return {Kind::SplitHalf, {}}; }
  static OpeningSchedule explicit_times(std::vector<double> t) { return {Kind::Explicit, std::move(t)}; }
};

/// What a replication does when the likelihood is monotone along the
/// alpha/beta ridge. BoundaryFit predicts from the fit at the log-alpha bound
/// (effectively a Poisson prediction at the pooled rate); Exclude drops it.
enum class DegeneratePolicy { BoundaryFit, Exclude };

struct SimConfig {
  RatePrior prior;
  int centres = 150;
  double census_time = 200.0;
  OpeningSchedule schedule;
  Objective objective = Objective::Count;
  double horizon = 200.0;  ///< t+ (Count) or n+ (Time)
  double level = 0.9;
  int replications = 2000;
  std::uint64_t seed = 1;
  FitOptions fit;
  DegeneratePolicy degenerate_policy = DegeneratePolicy::BoundaryFit;
};

void validate(const SimConfig& config);

/// Execution settings; never affect results.
struct RunOptions {
  unsigned threads = 1;
};

struct CoverageReport {
  double mean_coverage_unadjusted = 0.0;  ///< percent
  double mean_coverage_adjusted = 0.0;    ///< percent
  double mean_width_unadjusted = 0.0;
  double mean_width_adjusted = 0.0;
  double mean_t_star = 0.0;
  double t_star_ratio = 0.0;  ///< mean t* over mean of per-trial average exposure
  double n_star_ratio = 0.0;  ///< mean n* over mean n
  std::size_t replications = 0;  ///< used in the averages
  std::size_t degenerate = 0;    ///< replications with a degenerate fit
  std::size_t excluded = 0;      ///< left out: no recruits, or degenerate under Exclude
};

struct GeneratedTrial {
  std::vector<double> rates;
  TrialData data;
};

/// Draws one trial: rates from the prior, exposures from the schedule,
/// Poisson counts. Every centre consumes its prior draw(s), one uniform for
/// the opening time (used or not) and its Poisson draw, in centre order.
GeneratedTrial generate_trial(const SimConfig& config, Stream& rng);

/// Probability under the true rates that the target lands in the interval
/// (inclusive endpoints for counts).
double exact_coverage(std::span<const double> rates, const PredictionInterval& interval,
                      Objective objective, double horizon);

struct QuantileProbabilitySample {
  std::vector<double> values;
  std::size_t degenerate = 0;
  std::size_t excluded = 0;
};

/// Per replication, P(target <= plug-in p-quantile | true rates).
QuantileProbabilitySample quantile_probability_study(const SimConfig& config, double p,
                                                     const RunOptions& run = {});

CoverageReport coverage_study(const SimConfig& config, const RunOptions& run = {});

/// Gaussian kernel estimate with Silverman bandwidth, reflected at 0 and 1.
std::vector<double> kernel_density(std::span<const double> samples, std::span<const double> grid);

/// One draw of the total rate from the plug-in posterior (sum over centres
/// of Gam(alpha_hat + n_c, beta_hat + t_c)).
double sample_posterior_total_rate(const TrialData& data, const ModelFit& fit, Stream& rng);

/// Sum in fixed pairwise order; the result depends only on the sequence.
double pairwise_sum(std::span<const double> values);

/// Runs body(i) for i in [0, n) on `threads` workers; rethrows the first error.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace recruit
