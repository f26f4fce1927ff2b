#pragma once

#include <vector>

#include "recruit/distributions.hpp"
#include "recruit/predict.hpp"

namespace recruit {

/// Law of W = Phi(slope * Z + shift), Z standard normal: the many-centre
/// limit of the probability that the target falls below its plug-in quantile.
struct LimitLaw {
  double slope = 1.0;
  double shift = 0.0;
  Objective objective = Objective::Count;
};

/// Count objective at quantile level p: slope sqrt(t+/t),
/// shift Phi^{-1}(p) sqrt(1 + (t+/beta) / (1 + t/beta)).
LimitLaw count_limit_law(double p, double beta, double t, double t_plus);

/// Time objective with a = n+/C: slope sqrt(a beta / (alpha t)),
/// shift Phi^{-1}(p) sqrt(1 + (a/alpha) / (1 + t/beta)).
LimitLaw time_limit_law(double p, double alpha, double beta, double t, double a);

double limit_prob_cdf(double w, const LimitLaw& law);
double limit_prob_density(double w, const LimitLaw& law);

/// Mass escaping to 1 as t+ grows without bound.
double limit_tail_mass(double p, double beta, double t);

/// Independent gamma components (shape_i, rate_i).
class GammaCollection {
 public:
  explicit GammaCollection(std::vector<GammaParams> items);
  const std::vector<GammaParams>& items() const { return items_; }
  bool common_rate() const;

 private:
  std::vector<GammaParams> items_;
};

/// j-th cumulant of the sum: (j-1)! * sum shape_i / rate_i^j.
double sum_gamma_cumulant(int j, const GammaCollection& coll);
/// Natural log of the same, finite even when the cumulant overflows.
double log_sum_gamma_cumulant(int j, const GammaCollection& coll);

/// log of the j-th cumulant of a single gamma: log((j-1)! shape / rate^j).
double log_gamma_cumulant(int j, const GammaParams& g);

/// Single gamma with the sum's mean and variance.
GammaParams moment_matched_gamma(const GammaCollection& coll);

struct CumulantRow {
  int j = 0;
  double sum_cumulant = 0.0;      ///< of the sum
  double matched_cumulant = 0.0;  ///< of the moment-matched gamma
  double log_gap = 0.0;           ///< log(sum) - log(matched), >= 0 when ordered
};

struct CumulantReport {
  std::vector<CumulantRow> rows;
  /// 0 < matched <= sum * (1 + 1e-9) held for every reported order.
  bool pass = true;
};

CumulantReport verify_cumulant_ordering(const GammaCollection& coll, int j_max);

}  // namespace recruit
