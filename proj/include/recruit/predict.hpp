#pragma once

#include <cstdint>
#include <utility>

#include "recruit/distributions.hpp"
#include "recruit/model.hpp"

namespace recruit {

/// The plug-in posterior of the total rate, matched on two moments to
/// Gam(C alpha_hat + n_star, beta_hat + t_star).
struct PooledPosterior {
  double n_star = 0.0;
  double t_star = 0.0;
  double shape = 0.0;
  double rate = 0.0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  std::size_t centres = 0;

  GammaParams gamma() const { return {shape, rate}; }
};

enum class Objective { Count, Time };

struct PredictionRequest {
  Objective objective = Objective::Count;
  /// Additional time t+ (Count) or additional recruits n+ (Time).
  double horizon = 1.0;
  double level = 0.9;
  bool adjusted = false;
};

struct PredictionInterval {
  double lower = 0.0;
  double upper = 0.0;
  double nominal_level = 0.0;
  std::pair<double, double> probs_used{0.0, 0.0};

  double width() const { return upper - lower; }
};

PooledPosterior pool_centres(const TrialData& data, const ModelFit& fit);

NegBinParams predictive_count_law(const PooledPosterior& pool, double t_plus);
Pearson6Params predictive_time_law(const PooledPosterior& pool, std::int64_t n_plus);

/// Tail probability to invert so the plug-in count quantile attains
/// probability `p` in the many-centre limit.
double adjust_probability_count(double p, double beta_hat, double t_eff, double t_plus);

/// Time-objective counterpart; `a` is the additional recruits per centre.
double adjust_probability_time(double p, double alpha_hat, double beta_hat, double t_eff,
                               double a);

/// Builds the predictive law from the pooled posterior and inverts it at
/// ((1 - level) / 2, (1 + level) / 2), adjusted when requested.
PredictionInterval prediction_interval(const TrialData& data, const ModelFit& fit,
                                       const PredictionRequest& request);

/// Same, from an already pooled posterior.
PredictionInterval prediction_interval(const PooledPosterior& pool,
                                       const PredictionRequest& request);

void validate(const PredictionRequest& request);

}  // namespace recruit
