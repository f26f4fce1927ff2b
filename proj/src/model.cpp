#include "recruit/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "recruit/nelder_mead.hpp"

namespace recruit {

TrialData::TrialData(double census_time, std::vector<CentreRecord> centres)
    : census_time_(census_time), centres_(std::move(centres)) {
  if (!(census_time_ > 0.0) || !std::isfinite(census_time_)) {
    throw DomainError("census time must be positive and finite");
  }
  if (centres_.empty()) throw InsufficientData("trial data needs at least one centre");
  const double slack = 1e-12 * census_time_;
  double first = 0.0;
  for (const auto& c : centres_) {
    if (!(c.exposure >= 0.0) || c.exposure > census_time_ + slack) {
      throw DomainError("centre '" + c.centre_id + "': exposure must lie in [0, census]");
    }
    if (c.count < 0) throw DomainError("centre '" + c.centre_id + "': negative count");
    if (c.exposure == 0.0 && c.count != 0) {
      throw DomainError("centre '" + c.centre_id + "': recruits with zero exposure");
    }
    total_count_ += c.count;
    if (c.exposure > 0.0) {
      ++active_;
      total_exposure_ += c.exposure;
      if (active_ == 1) {
        first = c.exposure;
      } else if (std::fabs(c.exposure - first) > 1e-12 * first) {
        equal_exposures_ = false;
      }
    }
  }
  common_exposure_ = equal_exposures_ ? first : 0.0;
}

namespace {

// Sufficient statistics arranged for cheap, cancellation-free evaluation.
// For integer n, lgamma(a + n) - lgamma(a) = sum_{j<n} log(a + j); summing
// over centres groups these into `tail[j]` = #{c : n_c > j}.
struct Summary {
  std::vector<double> exposure;  // active centres only
  std::vector<double> count;
  std::vector<double> tail;
  std::vector<std::int64_t> raw_counts;
  bool use_tail = true;
  double total = 0.0;
  double active = 0.0;

  explicit Summary(const TrialData& data) {
    std::int64_t max_count = 0;
    for (const auto& c : data.centres()) {
      if (c.exposure <= 0.0) continue;
      exposure.push_back(c.exposure);
      count.push_back(static_cast<double>(c.count));
      raw_counts.push_back(c.count);
      max_count = std::max(max_count, c.count);
    }
    total = static_cast<double>(data.total_count());
    active = static_cast<double>(exposure.size());
    use_tail = max_count <= 100000;
    if (use_tail) {
      tail.assign(static_cast<std::size_t>(max_count), 0.0);
      for (auto n : raw_counts)
        for (std::int64_t j = 0; j < n; ++j) tail[static_cast<std::size_t>(j)] += 1.0;
    }
  }

  // sum_c [lgamma(a + n_c) - lgamma(a)]
  double log_rising(double a) const {
    double s = 0.0;
    if (use_tail) {
      for (std::size_t j = 0; j < tail.size(); ++j) s += tail[j] * std::log(a + static_cast<double>(j));
    } else {
      for (double n : count) s += boost::math::lgamma(a + n) - boost::math::lgamma(a);
    }
    return s;
  }
  // sum_c [digamma(a + n_c) - digamma(a)]
  double digamma_rising(double a) const {
    double s = 0.0;
    if (use_tail) {
      for (std::size_t j = 0; j < tail.size(); ++j) s += tail[j] / (a + static_cast<double>(j));
    } else {
      for (double n : count) s += boost::math::digamma(a + n) - boost::math::digamma(a);
    }
    return s;
  }
  // sum_c [trigamma(a + n_c) - trigamma(a)]
  double trigamma_rising(double a) const {
    double s = 0.0;
    if (use_tail) {
      for (std::size_t j = 0; j < tail.size(); ++j) {
        const double d = a + static_cast<double>(j);
        s -= tail[j] / (d * d);
      }
    } else {
      for (double n : count) s += boost::math::trigamma(a + n) - boost::math::trigamma(a);
    }
    return s;
  }
  // sum_c n_c (n_c - 1) / 2 weighted form used by the profile derivative:
  // sum_j tail[j] * j * a / (a + j)
  double profile_pairs(double a) const {
    double s = 0.0;
    if (use_tail) {
      for (std::size_t j = 1; j < tail.size(); ++j) {
        const double jd = static_cast<double>(j);
        s += tail[j] * jd * a / (a + jd);
      }
    } else {
      // a * (n - a * (digamma(a+n) - digamma(a))) summed, same quantity.
      for (double n : count) s += a * (n - a * (boost::math::digamma(a + n) - boost::math::digamma(a)));
    }
    return s;
  }

  double loglik(double alpha, double beta) const {
    double s = log_rising(alpha);
    for (std::size_t c = 0; c < exposure.size(); ++c) {
      s -= alpha * std::log1p(exposure[c] / beta) + count[c] * std::log(beta + exposure[c]);
    }
    return s;
  }

  // Gradient with respect to (log alpha, log beta).
  std::pair<double, double> gradient(double alpha, double beta) const {
    double ga = digamma_rising(alpha);
    double gb = 0.0;
    for (std::size_t c = 0; c < exposure.size(); ++c) {
      const double t = exposure[c];
      ga -= std::log1p(t / beta);
      gb += (alpha * t - count[c] * beta) / (beta + t);
    }
    return {alpha * ga, gb};
  }

  // Hessian with respect to (log alpha, log beta): (uu, uv, vv).
  std::array<double, 3> hessian(double alpha, double beta) const {
    const auto [gu, gv] = gradient(alpha, beta);
    (void)gv;
    double huv = 0.0, hvv = 0.0;
    for (std::size_t c = 0; c < exposure.size(); ++c) {
      const double t = exposure[c];
      const double d = beta + t;
      huv += alpha * t / d;
      hvv -= beta * t * (alpha + count[c]) / (d * d);
    }
    const double huu = gu + alpha * alpha * trigamma_rising(alpha);
    return {huu, huv, hvv};
  }
};

// y - log(1 + y) without cancellation for small y.
double excess_over_log1p(double y) {
  if (std::fabs(y) < 1e-2) {
    double term = y * y;
    double s = 0.0;
    for (int k = 2; k < 14; ++k) {
      s += ((k % 2 == 0) ? 1.0 : -1.0) * term / k;
      term *= y;
    }
    return s;
  }
  return y - std::log1p(y);
}

double sup_norm(std::pair<double, double> g) { return std::max(std::fabs(g.first), std::fabs(g.second)); }

// Equal positive exposures: beta = alpha * C t / n and the profile likelihood
// depends on alpha alone. Its derivative times alpha^2 is
//   C a^2 h(n / (C a)) - sum_j tail[j] j a / (a + j),   h(y) = y - log1p(y),
// which has the sign of the profile slope and no cancellation at large a.
ModelFit fit_profile(const Summary& s, double common_t, const FitOptions& opt) {
  const double ratio = s.active * common_t / s.total;  // beta / alpha
  auto slope_sign = [&](double u) {
    const double a = std::exp(u);
    return s.active * a * a * excess_over_log1p(s.total / (s.active * a)) - s.profile_pairs(a);
  };

  ModelFit fit;
  fit.profiled = true;
  double lo = -40.0, hi = opt.log_alpha_bound;
  if (slope_sign(hi) > 0.0) {
    fit.alpha_hat = std::exp(hi);
    fit.beta_hat = fit.alpha_hat * ratio;
    fit.log_lik = s.loglik(fit.alpha_hat, fit.beta_hat);
    fit.degenerate = true;
    throw DegenerateLikelihood(fit);
  }
  int it = 0;
  while (hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)) && it < 200) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (slope_sign(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++it;
  }
  fit.alpha_hat = std::exp(0.5 * (lo + hi));
  fit.beta_hat = fit.alpha_hat * ratio;
  fit.log_lik = s.loglik(fit.alpha_hat, fit.beta_hat);
  fit.iterations = it;
  fit.gradient_norm = sup_norm(s.gradient(fit.alpha_hat, fit.beta_hat));
  fit.converged = true;
  return fit;
}

std::pair<double, double> moment_start(const Summary& s) {
  double exposure_total = 0.0, exposure_sq = 0.0;
  for (double t : s.exposure) {
    exposure_total += t;
    exposure_sq += t * t;
  }
  const double rate = s.total / exposure_total;
  double excess = 0.0;
  for (std::size_t c = 0; c < s.exposure.size(); ++c) {
    const double m = rate * s.exposure[c];
    excess += (s.count[c] - m) * (s.count[c] - m) - m;
  }
  double alpha = excess > 0.0 ? rate * rate * exposure_sq / excess : 10.0;
  alpha = std::clamp(alpha, 1e-2, 1e4);
  return {alpha, alpha / rate};
}

ModelFit fit_general(const Summary& s, const FitOptions& opt) {
  const double u_max = opt.log_alpha_bound + 5.0;
  auto objective = [&](const std::vector<double>& x) {
    if (x[0] > u_max || x[0] < -40.0 || std::fabs(x[1]) > 80.0) {
      return std::numeric_limits<double>::infinity();
    }
    return -s.loglik(std::exp(x[0]), std::exp(x[1]));
  };

  const auto [a0, b0] = moment_start(s);
  auto nm = nelder_mead(objective, {std::log(a0), std::log(b0)}, 0.5, opt.objective_tolerance,
                        opt.max_iterations);
  int iterations = nm.iterations;
  // A restart guards against a collapsed simplex.
  nm = nelder_mead(objective, nm.x, 0.05, opt.objective_tolerance, opt.max_iterations);
  iterations += nm.iterations;

  double u = nm.x[0], v = nm.x[1];
  // Newton polish on the log scale; the simplex alone cannot reach the
  // gradient tolerance.
  for (int k = 0; k < 50; ++k) {
    const double a = std::exp(u), b = std::exp(v);
    const auto g = s.gradient(a, b);
    if (sup_norm(g) <= 0.01 * opt.gradient_tolerance) break;
    const auto [huu, huv, hvv] = s.hessian(a, b);
    const double det = huu * hvv - huv * huv;
    if (!(huu < 0.0 && det > 0.0)) break;
    const double du = -(hvv * g.first - huv * g.second) / det;
    const double dv = -(-huv * g.first + huu * g.second) / det;
    const double base = s.loglik(a, b);
    double scale = 1.0;
    bool moved = false;
    for (int h = 0; h < 30; ++h, scale *= 0.5) {
      const double nu = u + scale * du, nv = v + scale * dv;
      if (nu > u_max) continue;
      if (s.loglik(std::exp(nu), std::exp(nv)) >= base - 1e-12 * std::fabs(base)) {
        u = nu;
        v = nv;
        moved = true;
        break;
      }
    }
    ++iterations;
    if (!moved) break;
  }

  ModelFit fit;
  fit.alpha_hat = std::exp(u);
  fit.beta_hat = std::exp(v);
  fit.log_lik = s.loglik(fit.alpha_hat, fit.beta_hat);
  fit.iterations = iterations;
  fit.gradient_norm = sup_norm(s.gradient(fit.alpha_hat, fit.beta_hat));

  // Monotone ridge: compare with the point at the alpha bound on the same ray.
  const double shift = opt.log_alpha_bound - u;
  const double ridge = shift > 0.0
                           ? s.loglik(std::exp(opt.log_alpha_bound), std::exp(v + shift))
                           : fit.log_lik;
  if (u >= opt.log_alpha_bound || ridge > fit.log_lik) {
    fit.degenerate = true;
    throw DegenerateLikelihood(fit);
  }
  fit.converged = nm.converged;
  return fit;
}

}  // namespace

double log_likelihood(double alpha, double beta, const TrialData& data) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw DomainError("log_likelihood: alpha and beta must be positive");
  }
  return Summary(data).loglik(alpha, beta);
}

std::pair<double, double> log_likelihood_gradient(double alpha, double beta,
                                                  const TrialData& data) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw DomainError("log_likelihood_gradient: alpha and beta must be positive");
  }
  return Summary(data).gradient(alpha, beta);
}

ModelFit fit_mle(const TrialData& data, const FitOptions& options) {
  if (data.total_count() == 0) throw InsufficientData("no recruits observed: cannot fit");
  if (data.active_centres() == 0) throw InsufficientData("no centre has positive exposure");
  const Summary s(data);
  if (data.equal_exposures()) return fit_profile(s, data.common_exposure(), options);
  return fit_general(s, options);
}

RateMoments posterior_rate_moments(const TrialData& data, const ModelFit& fit) {
  if (!(fit.alpha_hat > 0.0) || !(fit.beta_hat > 0.0)) {
    throw DomainError("posterior_rate_moments: fit parameters must be positive");
  }
  RateMoments m;
  for (const auto& c : data.centres()) {
    const double shape = fit.alpha_hat + static_cast<double>(c.count);
    const double rate = fit.beta_hat + c.exposure;
    m.mean += shape / rate;
    m.variance += shape / (rate * rate);
  }
  return m;
}

}  // namespace recruit
