#pragma once

#include <cstdint>

#include "recruit/rng.hpp"

namespace recruit {

/// Negative binomial counting successes before `size` failures, success
/// probability `prob`. `size` may be non-integer.
struct NegBinParams {
  double size = 1.0;
  double prob = 0.5;

  double mean() const { return size * prob / (1.0 - prob); }
  double variance() const { return mean() / (1.0 - prob); }
};

/// Beta-prime law scaled by `scale`: X / scale = B / (1 - B) with
/// B ~ Beta(shape_num, shape_den).
struct Pearson6Params {
  double shape_num = 1.0;
  double shape_den = 1.0;
  double scale = 1.0;

  /// Requires shape_den > 1.
  double mean() const { return scale * shape_num / (shape_den - 1.0); }
  /// Requires shape_den > 2.
  double variance() const {
    return mean() * scale * (shape_num + shape_den - 1.0) /
           ((shape_den - 1.0) * (shape_den - 2.0));
  }
};

/// Gamma with shape/rate parameterisation.
struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;

  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
};

void validate(const NegBinParams& p);
void validate(const Pearson6Params& p);
void validate(const GammaParams& p);

double log_gamma_fn(double x);

double normal_cdf(double z);
double normal_pdf(double z);
double normal_quantile(double p);

double nb_pmf(std::int64_t k, const NegBinParams& params);
double nb_cdf(std::int64_t k, const NegBinParams& params);
std::int64_t nb_quantile(double q, const NegBinParams& params);

double pearson6_pdf(double x, const Pearson6Params& params);
double pearson6_cdf(double x, const Pearson6Params& params);
double pearson6_quantile(double q, const Pearson6Params& params);

double gamma_cdf(double x, const GammaParams& params);
double poisson_cdf(std::int64_t k, double mean);

double sample_gamma(const GammaParams& params, Stream& rng);
std::int64_t sample_poisson(double mean, Stream& rng);

}  // namespace recruit
