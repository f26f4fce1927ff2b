#include "recruit/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "recruit/errors.hpp"

namespace recruit {

namespace {

void require_open_unit(double w, const char* what) {
  if (!(w > 0.0 && w < 1.0)) throw DomainError(std::string(what) + ": argument must lie in (0,1)");
}

double log_sum_exp(const std::vector<double>& terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double x : terms) s += std::exp(x - top);
  return top + std::log(s);
}

}  // namespace

LimitLaw count_limit_law(double p, double beta, double t, double t_plus) {
  if (!(beta >= 0.0) || !(t > 0.0) || !(t_plus > 0.0)) {
    throw DomainError("count_limit_law: need beta >= 0 and t, t+ > 0");
  }
  const double spread = beta == 0.0 ? 1.0 : std::sqrt(1.0 + (t_plus / beta) / (1.0 + t / beta));
  return {std::sqrt(t_plus / t), normal_quantile(p) * spread, Objective::Count};
}

LimitLaw time_limit_law(double p, double alpha, double beta, double t, double a) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(t > 0.0) || !(a > 0.0)) {
    throw DomainError("time_limit_law: parameters must be positive");
  }
  const double spread = std::sqrt(1.0 + (a / alpha) / (1.0 + t / beta));
  return {std::sqrt(a * beta / (alpha * t)), normal_quantile(p) * spread, Objective::Time};
}

double limit_prob_cdf(double w, const LimitLaw& law) {
  if (!(law.slope > 0.0)) throw DomainError("limit law slope must be positive");
  if (std::isnan(w)) throw DomainError("limit_prob_cdf: argument is NaN");
  if (w <= 0.0) return 0.0;
  if (w >= 1.0) return 1.0;
  return normal_cdf((normal_quantile(w) - law.shift) / law.slope);
}

double limit_prob_density(double w, const LimitLaw& law) {
  require_open_unit(w, "limit_prob_density");
  if (!(law.slope > 0.0)) throw DomainError("limit law slope must be positive");
  const double z = normal_quantile(w);
  const double u = (z - law.shift) / law.slope;
  // ratio of normal densities in log form to survive the tails
  return std::exp(0.5 * (z * z - u * u)) / law.slope;
}

double limit_tail_mass(double p, double beta, double t) {
  if (!(p > 0.0 && p < 1.0) || !(beta >= 0.0) || !(t > 0.0)) {
    throw DomainError("limit_tail_mass: need p in (0,1), beta >= 0, t > 0");
  }
  if (beta == 0.0) return p;
  return normal_cdf(std::sqrt(t / (beta + t)) * normal_quantile(p));
}

GammaCollection::GammaCollection(std::vector<GammaParams> items) : items_(std::move(items)) {
  if (items_.empty()) throw DomainError("gamma collection must be non-empty");
  for (const auto& g : items_) validate(g);
}

bool GammaCollection::common_rate() const {
  return std::all_of(items_.begin(), items_.end(),
                     [&](const GammaParams& g) { return g.rate == items_.front().rate; });
}

double log_gamma_cumulant(int j, const GammaParams& g) {
  if (j < 1) throw DomainError("cumulant order must be at least 1");
  return boost::math::lgamma(static_cast<double>(j)) + std::log(g.shape) -
         static_cast<double>(j) * std::log(g.rate);
}

double log_sum_gamma_cumulant(int j, const GammaCollection& coll) {
  if (j < 1) throw DomainError("cumulant order must be at least 1");
  std::vector<double> terms;
  terms.reserve(coll.items().size());
  for (const auto& g : coll.items()) terms.push_back(std::log(g.shape) - j * std::log(g.rate));
  return boost::math::lgamma(static_cast<double>(j)) + log_sum_exp(terms);
}

double sum_gamma_cumulant(int j, const GammaCollection& coll) {
  if (j < 1) throw DomainError("cumulant order must be at least 1");
  if (j > 20) return std::exp(log_sum_gamma_cumulant(j, coll));
  double factorial = 1.0;
  for (int k = 2; k < j; ++k) factorial *= k;
  double s = 0.0;
  for (const auto& g : coll.items()) s += g.shape / std::pow(g.rate, j);
  return factorial * s;
}

GammaParams moment_matched_gamma(const GammaCollection& coll) {
  if (coll.common_rate()) {
    double shape = 0.0;
    for (const auto& g : coll.items()) shape += g.shape;
    return {shape, coll.items().front().rate};
  }
  const double k1 = sum_gamma_cumulant(1, coll);
  const double k2 = sum_gamma_cumulant(2, coll);
  return {k1 * k1 / k2, k1 / k2};
}

CumulantReport verify_cumulant_ordering(const GammaCollection& coll, int j_max) {
  if (j_max < 3) throw DomainError("verify_cumulant_ordering: j_max must be at least 3");
  const GammaParams matched = moment_matched_gamma(coll);
  CumulantReport report;
  for (int j = 3; j <= j_max; ++j) {
    CumulantRow row;
    row.j = j;
    const double log_sum = log_sum_gamma_cumulant(j, coll);
    const double log_matched = log_gamma_cumulant(j, matched);
    row.sum_cumulant = std::exp(log_sum);
    row.matched_cumulant = std::exp(log_matched);
    row.log_gap = log_sum - log_matched;
    const bool positive = std::isfinite(log_matched);
    const bool ordered = log_matched <= log_sum + std::log1p(1e-9);
    if (!(positive && ordered)) report.pass = false;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace recruit
