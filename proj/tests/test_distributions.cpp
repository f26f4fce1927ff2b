#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "recruit/distributions.hpp"
#include "recruit/errors.hpp"

using namespace recruit;

TEST_CASE("log gamma at exact points") {
  CHECK(log_gamma_fn(1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(log_gamma_fn(0.5) - 0.5 * std::log(std::numbers::pi)) < 1e-12);
  CHECK(std::abs(log_gamma_fn(10.0) - std::log(362880.0)) < 1e-12);
  // Large arguments: relative accuracy against Stirling with three terms.
  for (double x : {1e3, 1e5, 1e8}) {
    const double stirling = (x - 0.5) * std::log(x) - x + 0.5 * std::log(2 * std::numbers::pi) +
                            1 / (12 * x) - 1 / (360 * x * x * x);
    CHECK(std::abs(log_gamma_fn(x) - stirling) / stirling < 1e-14);
  }
  CHECK_THROWS_AS(log_gamma_fn(0.0), DomainError);
  CHECK_THROWS_AS(log_gamma_fn(-1.0), DomainError);
}

TEST_CASE("normal helpers") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(std::abs(normal_quantile(0.95) - 1.6448536269514722) < 1e-14);
  for (double z : {-8.0, -3.0, -0.7, 0.2, 1.9, 6.0}) {
    CHECK(std::abs(normal_cdf(z) - static_cast<double>(oracle::normal_cdf(z))) < 1e-16 + 1e-14 * normal_cdf(z));
    // The upper tail loses digits in cdf(z) itself, so round trip below the median side.
    const double zl = -std::abs(z);
    CHECK(std::abs(normal_quantile(normal_cdf(zl)) - zl) < 1e-9);
  }
}

TEST_CASE("negative binomial cdf") {
  CHECK(nb_cdf(0, {1.0, 0.5}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(nb_cdf(5, {1.0, 0.5}) == doctest::Approx(0.984375).epsilon(1e-15));
  CHECK(std::abs(nb_cdf(10, {2.5, 0.3}) - static_cast<double>(oracle::nb_cdf(10, 2.5, 0.3))) < 1e-13);
  CHECK(nb_cdf(-1, {2.0, 0.4}) == 0.0);
  CHECK_THROWS_AS(nb_cdf(3, {0.0, 0.5}), DomainError);
  CHECK_THROWS_AS(nb_cdf(3, {1.0, 1.0}), DomainError);
}

TEST_CASE("negative binomial pmf sums to the cdf") {
  const NegBinParams p{7.3, 0.62};
  double s = 0;
  for (int k = 0; k <= 40; ++k) s += nb_pmf(k, p);
  CHECK(std::abs(s - nb_cdf(40, p)) < 1e-12);
}

TEST_CASE("negative binomial quantile") {
  CHECK(nb_quantile(1e-300, {4.0, 0.3}) == 0);
  CHECK(nb_quantile(0.5, {1.0, 0.5}) == 0);
  const NegBinParams big{302.0, 200.0 / 550.0};
  // Brute force: first k whose summed cdf reaches 0.95.
  std::int64_t k = 0;
  while (oracle::nb_cdf(k, big.size, big.prob) < 0.95L) ++k;
  CHECK(nb_quantile(0.95, big) == k);
  CHECK_THROWS_AS(nb_quantile(0.0, big), DomainError);
  CHECK_THROWS_AS(nb_quantile(1.0, big), DomainError);
}

TEST_CASE("pearson VI cdf and quantile") {
  CHECK(pearson6_cdf(0.0, {2.0, 3.0, 1.0}) == 0.0);
  CHECK(pearson6_cdf(1.0, {1.0, 1.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pearson6_quantile(0.5, {1.0, 1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));

  // Quadrature of the density against the closed form.
  const Pearson6Params p{200.0, 302.0, 350.0};
  const auto log_norm = std::lgamma(200.0L) + std::lgamma(302.0L) - std::lgamma(502.0L);
  auto pdf = [&](oracle::ld x) {
    return std::exp((p.shape_num - 1) * std::log(x / p.scale) -
                    (p.shape_num + p.shape_den) * std::log1p(x / p.scale) - log_norm) /
           p.scale;
  };
  const double quad = static_cast<double>(oracle::integrate(pdf, 0.0L, 230.0L, 1e-16L));
  CHECK(std::abs(pearson6_cdf(230.0, p) - quad) < 1e-10);
  CHECK(std::abs(pearson6_pdf(230.0, p) - static_cast<double>(pdf(230.0L))) < 1e-14);

  for (double q : {0.05, 0.5, 0.95}) {
    CHECK(std::abs(pearson6_cdf(pearson6_quantile(q, p), p) - q) < 1e-9);
  }
  CHECK(pearson6_quantile(1e-300, {3.0, 4.0, 2.0}) < 1e-90);
}

TEST_CASE("gamma and poisson cdf") {
  CHECK(std::abs(gamma_cdf(0.7, {1.0, 2.0}) - (1 - std::exp(-1.4))) < 1e-15);
  CHECK(std::abs(gamma_cdf(2.0, {3.0, 1.0}) - (1 - std::exp(-2.0) * 5.0)) < 1e-15);
  CHECK(std::abs(gamma_cdf(2.0, {3.0, 1.0}) - 0.323324) < 1e-6);
  CHECK(std::abs(poisson_cdf(0, 3.7) - std::exp(-3.7)) < 1e-16);
  CHECK_THROWS_AS(poisson_cdf(-1, 2.0), DomainError);
  CHECK_THROWS_AS(gamma_cdf(-1.0, {2.0, 1.0}), DomainError);
}

TEST_CASE("samplers: moments and distribution") {
  Stream rng(42);
  const int n = 1'000'000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_gamma({2.0, 150.0}, rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double sd = std::sqrt(2.0) / 150.0;
  CHECK(std::abs(mean - 2.0 / 150.0) < 3 * sd / std::sqrt(n));

  s = s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(sample_poisson(5.0, rng));
    s += x;
    s2 += x * x;
  }
  const double m = s / n;
  const double var = (s2 - n * m * m) / (n - 1);
  // Var of the sample variance for Poisson(mu): (mu + 2 mu^2) / n approximately.
  CHECK(std::abs(var - 5.0) < 3 * std::sqrt((5.0 + 2 * 25.0) / n));

  for (double shape : {0.3, 2.0, 45.0}) {
    std::vector<double> xs(100'000);
    for (auto& x : xs) x = sample_gamma({shape, 1.7}, rng);
    std::sort(xs.begin(), xs.end());
    double d = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double f = gamma_cdf(xs[i], {shape, 1.7});
      d = std::max({d, f - static_cast<double>(i) / xs.size(), static_cast<double>(i + 1) / xs.size() - f});
    }
    CHECK(d < 1.63 / std::sqrt(1e5));
  }

  // Poisson draws across the inversion / transformed-rejection switch.
  for (double mu : {0.4, 9.5, 10.5, 37.0, 2500.0}) {
    const int draws = 200'000;
    std::vector<double> counts(static_cast<std::size_t>(mu * 3 + 50), 0.0);
    for (int i = 0; i < draws; ++i) {
      const auto k = static_cast<std::size_t>(sample_poisson(mu, rng));
      if (k < counts.size()) counts[k] += 1;
    }
    // Compare the empirical cdf with the exact one at a few quantiles.
    double cum = 0;
    double worst = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      cum += counts[k] / draws;
      worst = std::max(worst, std::abs(cum - poisson_cdf(static_cast<std::int64_t>(k), mu)));
    }
    CHECK(worst < 1.63 / std::sqrt(static_cast<double>(draws)));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate(NegBinParams{-1.0, 0.5}), DomainError);
  CHECK_THROWS_AS(validate(Pearson6Params{1.0, 0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(validate(GammaParams{1.0, -2.0}), DomainError);
  CHECK_NOTHROW(validate(GammaParams{0.5, 2.0}));
}
