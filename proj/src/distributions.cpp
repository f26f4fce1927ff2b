#include "recruit/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "recruit/errors.hpp"

namespace recruit {

namespace {

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

void require_open_unit(double q, const char* what) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError(std::string(what) + ": probability must lie in (0,1), got " +
                      std::to_string(q));
  }
}

// Below this size the incomplete-beta route loses relative accuracy in the
// upper tail; the cdf is then summed term by term.
constexpr double kSmallSize = 1e-3;

double nb_cdf_by_summation(std::int64_t k, const NegBinParams& p) {
  double term = std::exp(p.size * std::log1p(-p.prob));
  double total = term;
  for (std::int64_t j = 0; j < k; ++j) {
    term *= (p.size + static_cast<double>(j)) / static_cast<double>(j + 1) * p.prob;
    total += term;
    if (term < total * 1e-17 && static_cast<double>(j) > p.mean()) break;
  }
  return std::min(total, 1.0);
}

}  // namespace

void validate(const NegBinParams& p) {
  if (!positive_finite(p.size) || !(p.prob > 0.0 && p.prob < 1.0)) {
    throw DomainError("negative binomial requires size > 0 and 0 < prob < 1");
  }
}

void validate(const Pearson6Params& p) {
  if (!positive_finite(p.shape_num) || !positive_finite(p.shape_den) ||
      !positive_finite(p.scale)) {
    throw DomainError("Pearson VI requires strictly positive parameters");
  }
}

void validate(const GammaParams& p) {
  if (!positive_finite(p.shape) || !positive_finite(p.rate)) {
    throw DomainError("gamma requires shape > 0 and rate > 0");
  }
}

double log_gamma_fn(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma_fn: argument must be positive");
  return boost::math::lgamma(x);
}

double normal_cdf(double z) {
  return 0.5 * boost::math::erfc(-z / std::numbers::sqrt2);
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double p) {
  require_open_unit(p, "normal_quantile");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double nb_pmf(std::int64_t k, const NegBinParams& params) {
  validate(params);
  if (k < 0) return 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(boost::math::lgamma(params.size + kd) - boost::math::lgamma(params.size) -
                  boost::math::lgamma(kd + 1.0) + kd * std::log(params.prob) +
                  params.size * std::log1p(-params.prob));
}

double nb_cdf(std::int64_t k, const NegBinParams& params) {
  validate(params);
  if (k < 0) return 0.0;
  if (params.size < kSmallSize) return nb_cdf_by_summation(k, params);
  return boost::math::ibeta(params.size, static_cast<double>(k) + 1.0, 1.0 - params.prob);
}

std::int64_t nb_quantile(double q, const NegBinParams& params) {
  require_open_unit(q, "nb_quantile");
  validate(params);
  constexpr std::int64_t kMax = std::int64_t{1} << 60;

  // Invariant once bracketed: cdf(lo) < q <= cdf(hi), with cdf(-1) = 0.
  std::int64_t start = static_cast<std::int64_t>(std::floor(std::min(params.mean(), 1e17)));
  std::int64_t lo, hi;
  if (nb_cdf(start, params) >= q) {
    hi = start;
    std::int64_t step = 1;
    lo = hi - step;
    while (lo >= 0 && nb_cdf(lo, params) >= q) {
      hi = lo;
      step *= 2;
      lo = hi - step;
    }
    if (lo < -1) lo = -1;
  } else {
    lo = start;
    std::int64_t step = 1;
    hi = lo + step;
    while (nb_cdf(hi, params) < q) {
      if (hi >= kMax) throw DomainError("nb_quantile: quantile beyond representable range");
      lo = hi;
      step *= 2;
      hi = lo + step;
    }
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (nb_cdf(mid, params) >= q) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double pearson6_pdf(double x, const Pearson6Params& params) {
  validate(params);
  if (x < 0.0) throw DomainError("pearson6_pdf: x must be non-negative");
  if (x == 0.0) {
    if (params.shape_num < 1.0) return std::numeric_limits<double>::infinity();
    return params.shape_num == 1.0 ? params.shape_den / params.scale : 0.0;
  }
  const double a = params.shape_num;
  const double b = params.shape_den;
  const double log_density = -(boost::math::lgamma(a) + boost::math::lgamma(b) -
                               boost::math::lgamma(a + b)) +
                             (a - 1.0) * std::log(x) + b * std::log(params.scale) -
                             (a + b) * std::log(params.scale + x);
  return std::exp(log_density);
}

double pearson6_cdf(double x, const Pearson6Params& params) {
  validate(params);
  if (x < 0.0) throw DomainError("pearson6_cdf: x must be non-negative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  // Complementary argument computed directly to keep accuracy near 1.
  const double z = x / (x + params.scale);
  const double zc = params.scale / (x + params.scale);
  if (z <= 0.5) return boost::math::ibeta(params.shape_num, params.shape_den, z);
  return 1.0 - boost::math::ibeta(params.shape_den, params.shape_num, zc);
}

double pearson6_quantile(double q, const Pearson6Params& params) {
  require_open_unit(q, "pearson6_quantile");
  validate(params);
  double complement = 0.0;
  double b = 0.0;
  try {
    b = boost::math::ibeta_inv(params.shape_num, params.shape_den, q, &complement);
  } catch (const boost::math::evaluation_error&) {
    // Far lower tail where Boost's root finder gives up: bisect on log z.
    double lo = std::log(std::numeric_limits<double>::min());
    double hi = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::abs(lo); ++i) {
      const double mid = 0.5 * (lo + hi);
      (boost::math::ibeta(params.shape_num, params.shape_den, std::exp(mid)) < q ? lo : hi) = mid;
    }
    b = std::exp(hi);
    complement = -std::expm1(hi);
  }
  if (complement <= 0.0) return std::numeric_limits<double>::infinity();
  return params.scale * b / complement;
}

double gamma_cdf(double x, const GammaParams& params) {
  validate(params);
  if (x < 0.0) throw DomainError("gamma_cdf: x must be non-negative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(params.shape, params.rate * x);
}

double poisson_cdf(std::int64_t k, double mean) {
  if (k < 0) throw DomainError("poisson_cdf: k must be non-negative");
  if (!positive_finite(mean)) throw DomainError("poisson_cdf: mean must be positive");
  return boost::math::gamma_q(static_cast<double>(k) + 1.0, mean);
}

double sample_gamma(const GammaParams& params, Stream& rng) {
  validate(params);
  double shape = params.shape;
  double boost_factor = 1.0;
  if (shape < 1.0) {
    // Gam(a) = Gam(a + 1) * U^(1/a)
    boost_factor = std::pow(rng.uniform(), 1.0 / shape);
    shape += 1.0;
  }
  // Marsaglia & Tsang squeeze method.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return boost_factor * d * v / params.rate;
    }
  }
}

std::int64_t sample_poisson(double mean, Stream& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw DomainError("sample_poisson: mean must be non-negative and finite");
  }
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Sequential inversion.
    const double u = rng.uniform();
    double term = std::exp(-mean);
    double cdf = term;
    std::int64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      term *= mean / static_cast<double>(k);
      cdf += term;
    }
    return k;
  }
  // Hoermann's transformed rejection with squeeze (PTRS).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - boost::math::lgamma(k + 1.0)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

}  // namespace recruit
