#include "recruit/predict.hpp"

#include <cmath>
#include <string>

namespace recruit {

namespace {

void require_probability(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(std::string(what) + ": p must lie in (0,1)");
  }
}

// Phi(k * Phi^{-1}(p)) for a widening factor k >= 1.
double stretch_probability(double p, double radicand) {
  if (radicand == 1.0) return p;
  return normal_cdf(std::sqrt(radicand) * normal_quantile(p));
}

}  // namespace

void validate(const PredictionRequest& request) {
  if (!(request.level > 0.0 && request.level < 1.0)) {
    throw DomainError("prediction level must lie in (0,1)");
  }
  if (!(request.horizon > 0.0) || !std::isfinite(request.horizon)) {
    throw DomainError("prediction horizon must be positive");
  }
  if (request.objective == Objective::Time && request.horizon != std::floor(request.horizon)) {
    throw DomainError("time objective needs an integer number of additional recruits");
  }
}

PooledPosterior pool_centres(const TrialData& data, const ModelFit& fit) {
  if (fit.degenerate) throw DegenerateLikelihood(fit);
  if (!(fit.alpha_hat > 0.0) || !(fit.beta_hat > 0.0)) {
    throw DomainError("pool_centres: fit parameters must be positive");
  }
  const double alpha = fit.alpha_hat;
  const double beta = fit.beta_hat;
  PooledPosterior pool;
  pool.alpha_hat = alpha;
  pool.beta_hat = beta;
  pool.centres = data.size();
  const double c_alpha = static_cast<double>(data.size()) * alpha;
  if (data.equal_exposures() && data.active_centres() == data.size()) {
    // The sum of posteriors is already gamma; avoid rounding noise.
    pool.n_star = static_cast<double>(data.total_count());
    pool.t_star = data.common_exposure();
  } else {
    // With weights w_c = (alpha + n_c) / (beta + t_c)^2 the matched rate is
    // beta + sum w_c t_c / sum w_c, and the matched shape follows from
    // rho_c = (beta + t*) / (beta + t_c). Written this way nothing cancels
    // when alpha and beta are large.
    double w_sum = 0.0, wt_sum = 0.0;
    for (const auto& c : data.centres()) {
      const double w = (alpha + static_cast<double>(c.count)) / ((beta + c.exposure) * (beta + c.exposure));
      w_sum += w;
      wt_sum += w * c.exposure;
    }
    pool.t_star = wt_sum / w_sum;
    double n_star = 0.0;
    for (const auto& c : data.centres()) {
      const double delta = (pool.t_star - c.exposure) / (beta + c.exposure);
      const double grow = delta * (2.0 + delta);  // rho^2 - 1
      n_star += static_cast<double>(c.count) * (1.0 + grow) + alpha * grow;
    }
    pool.n_star = n_star;
  }
  pool.shape = c_alpha + pool.n_star;
  pool.rate = beta + pool.t_star;
  return pool;
}

NegBinParams predictive_count_law(const PooledPosterior& pool, double t_plus) {
  if (!(t_plus > 0.0)) throw DomainError("predictive_count_law: t_plus must be positive");
  NegBinParams law{pool.shape, t_plus / (pool.rate + t_plus)};
  validate(law);
  return law;
}

Pearson6Params predictive_time_law(const PooledPosterior& pool, std::int64_t n_plus) {
  if (n_plus < 1) throw DomainError("predictive_time_law: n_plus must be at least 1");
  Pearson6Params law{static_cast<double>(n_plus), pool.shape, pool.rate};
  validate(law);
  return law;
}

double adjust_probability_count(double p, double beta_hat, double t_eff, double t_plus) {
  require_probability(p, "adjust_probability_count");
  if (!(beta_hat >= 0.0) || !(t_eff > 0.0) || !(t_plus >= 0.0)) {
    throw DomainError("adjust_probability_count: need beta >= 0, t > 0, t+ >= 0");
  }
  const double radicand =
      ((beta_hat + t_eff) * (t_eff + t_plus)) / (t_eff * (beta_hat + t_eff + t_plus));
  return stretch_probability(p, radicand);
}

double adjust_probability_time(double p, double alpha_hat, double beta_hat, double t_eff,
                               double a) {
  require_probability(p, "adjust_probability_time");
  if (!(alpha_hat > 0.0) || !(beta_hat > 0.0) || !(t_eff > 0.0) || !(a >= 0.0)) {
    throw DomainError("adjust_probability_time: need alpha, beta, t > 0 and a >= 0");
  }
  const double slope_sq = a * beta_hat / (alpha_hat * t_eff);
  const double spread_sq = 1.0 + (a / alpha_hat) / (1.0 + t_eff / beta_hat);
  return stretch_probability(p, (1.0 + slope_sq) / spread_sq);
}

PredictionInterval prediction_interval(const PooledPosterior& pool,
                                       const PredictionRequest& request) {
  validate(request);
  PredictionInterval out;
  out.nominal_level = request.level;
  double lo = 0.5 * (1.0 - request.level);
  double hi = 0.5 * (1.0 + request.level);

  if (request.objective == Objective::Count) {
    if (request.adjusted) {
      lo = adjust_probability_count(lo, pool.beta_hat, pool.t_star, request.horizon);
      hi = adjust_probability_count(hi, pool.beta_hat, pool.t_star, request.horizon);
    }
    const NegBinParams law = predictive_count_law(pool, request.horizon);
    out.lower = static_cast<double>(nb_quantile(lo, law));
    out.upper = static_cast<double>(nb_quantile(hi, law));
  } else {
    const auto n_plus = static_cast<std::int64_t>(request.horizon);
    if (request.adjusted) {
      const double a = request.horizon / static_cast<double>(pool.centres);
      lo = adjust_probability_time(lo, pool.alpha_hat, pool.beta_hat, pool.t_star, a);
      hi = adjust_probability_time(hi, pool.alpha_hat, pool.beta_hat, pool.t_star, a);
    }
    const Pearson6Params law = predictive_time_law(pool, n_plus);
    out.lower = pearson6_quantile(lo, law);
    out.upper = pearson6_quantile(hi, law);
  }
  out.probs_used = {lo, hi};
  return out;
}

PredictionInterval prediction_interval(const TrialData& data, const ModelFit& fit,
                                       const PredictionRequest& request) {
  return prediction_interval(pool_centres(data, fit), request);
}

}  // namespace recruit
