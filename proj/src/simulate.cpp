#include "recruit/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>

#include "recruit/distributions.hpp"

namespace recruit {

double RatePrior::mean() const {
  if (kind == Kind::SingleGamma) return alpha / beta;
  return 0.5 * (alpha / beta + alpha / beta2);
}

void validate(const SimConfig& c) {
  if (!(c.prior.alpha > 0.0) || !(c.prior.beta > 0.0) || !(c.prior.beta2 > 0.0)) {
    throw ConfigError("rate prior parameters must be positive");
  }
  if (c.centres < 1) throw ConfigError("need at least one centre");
  if (!(c.census_time > 0.0)) throw ConfigError("census time must be positive");
  if (!(c.horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (c.objective == Objective::Time && c.horizon != std::floor(c.horizon)) {
    throw ConfigError("time objective horizon must be an integer recruit count");
  }
  if (!(c.level > 0.0 && c.level < 1.0)) throw ConfigError("level must lie in (0,1)");
  if (c.replications < 1) throw ConfigError("replications must be at least 1");
  if (c.schedule.kind == OpeningSchedule::Kind::Explicit) {
    if (c.schedule.opening_times.size() != static_cast<std::size_t>(c.centres)) {
      throw ConfigError("explicit schedule needs one opening time per centre");
    }
    for (double o : c.schedule.opening_times) {
      if (!(o >= 0.0 && o <= c.census_time)) {
        throw ConfigError("opening times must lie in [0, census]");
      }
    }
  }
}

GeneratedTrial generate_trial(const SimConfig& config, Stream& rng) {
  const auto n = static_cast<std::size_t>(config.centres);
  const double t = config.census_time;
  std::vector<double> rates(n);
  std::vector<CentreRecord> centres(n);
  for (std::size_t c = 0; c < n; ++c) {
    double rate_param = config.prior.beta;
    if (config.prior.kind == RatePrior::Kind::GammaMixture && rng.uniform() >= 0.5) {
      rate_param = config.prior.beta2;
    }
    rates[c] = sample_gamma({config.prior.alpha, rate_param}, rng);

    const double u = rng.uniform();
    double opening = 0.0;
    switch (config.schedule.kind) {
      case OpeningSchedule::Kind::Simultaneous: opening = 0.0; break;
      case OpeningSchedule::Kind::UniformOnCensus: opening = u * t; break;
      // first ceil(C/2) centres open at 0, the rest at the census
      case OpeningSchedule::Kind::SplitHalf: opening = c < (n + 1) / 2 ? 0.0 : t; break;
      case OpeningSchedule::Kind::Explicit: opening = config.schedule.opening_times[c]; break;
    }
    const double exposure = t - opening;
    centres[c].centre_id = std::to_string(c + 1);
    centres[c].exposure = exposure;
    centres[c].count = exposure > 0.0 ? sample_poisson(rates[c] * exposure, rng) : 0;
  }
  return {std::move(rates), TrialData(t, std::move(centres))};
}

double exact_coverage(std::span<const double> rates, const PredictionInterval& interval,
                      Objective objective, double horizon) {
  double total = 0.0;
  for (double r : rates) total += r;
  if (!(total > 0.0)) throw DomainError("exact_coverage: rates must be positive");
  if (objective == Objective::Count) {
    const double mean = total * horizon;
    const auto lower = static_cast<std::int64_t>(interval.lower);
    const auto upper = static_cast<std::int64_t>(interval.upper);
    const double below = lower > 0 ? poisson_cdf(lower - 1, mean) : 0.0;
    return std::max(poisson_cdf(upper, mean) - below, 0.0);
  }
  const GammaParams law{horizon, total};
  return std::max(gamma_cdf(interval.upper, law) - gamma_cdf(interval.lower, law), 0.0);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

namespace {

struct Replication {
  bool degenerate = false;
  bool excluded = false;
  double coverage_unadjusted = 0.0;
  double coverage_adjusted = 0.0;
  double width_unadjusted = 0.0;
  double width_adjusted = 0.0;
  double t_star = 0.0;
  double mean_exposure = 0.0;
  double n_star = 0.0;
  double n_total = 0.0;
};

double mean_of(const std::vector<Replication>& reps, double Replication::*field) {
  std::vector<double> v;
  v.reserve(reps.size());
  for (const auto& r : reps)
    if (!r.excluded) v.push_back(r.*field);
  return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

// Fit and pool one simulated trial; empty when the replication is left out.
std::optional<PooledPosterior> pool_replication(const SimConfig& config, const TrialData& data,
                                                bool& degenerate) {
  degenerate = false;
  ModelFit fit;
  try {
    fit = fit_mle(data, config.fit);
  } catch (const DegenerateLikelihood& e) {
    degenerate = true;
    if (config.degenerate_policy == DegeneratePolicy::Exclude) return std::nullopt;
    fit = e.fit();
    fit.degenerate = false;
  } catch (const InsufficientData&) {
    return std::nullopt;
  }
  return pool_centres(data, fit);
}

}  // namespace

QuantileProbabilitySample quantile_probability_study(const SimConfig& config, double p,
                                                     const RunOptions& run) {
  validate(config);
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("quantile level must lie in (0,1)");
  const auto reps = static_cast<std::size_t>(config.replications);
  std::vector<double> values(reps, 0.0);
  std::vector<char> degenerate(reps, 0);
  std::vector<char> excluded(reps, 0);

  parallel_for(reps, run.threads, [&](std::size_t i) {
    Stream rng = Stream::substream(config.seed, i);
    const GeneratedTrial trial = generate_trial(config, rng);
    bool deg = false;
    const auto pooled = pool_replication(config, trial.data, deg);
    degenerate[i] = deg;
    if (!pooled) {
      excluded[i] = 1;
      return;
    }
    const PooledPosterior& pool = *pooled;
    double total = 0.0;
    for (double r : trial.rates) total += r;
    if (config.objective == Objective::Count) {
      const auto q = nb_quantile(p, predictive_count_law(pool, config.horizon));
      values[i] = poisson_cdf(q, total * config.horizon);
    } else {
      const auto n_plus = static_cast<std::int64_t>(config.horizon);
      const double r = pearson6_quantile(p, predictive_time_law(pool, n_plus));
      values[i] = gamma_cdf(r, {config.horizon, total});
    }
  });

  QuantileProbabilitySample out;
  for (std::size_t i = 0; i < reps; ++i) {
    if (degenerate[i]) ++out.degenerate;
    if (excluded[i]) {
      ++out.excluded;
    } else {
      out.values.push_back(values[i]);
    }
  }
  return out;
}

CoverageReport coverage_study(const SimConfig& config, const RunOptions& run) {
  validate(config);
  const auto reps = static_cast<std::size_t>(config.replications);
  std::vector<Replication> results(reps);

  parallel_for(reps, run.threads, [&](std::size_t i) {
    Stream rng = Stream::substream(config.seed, i);
    const GeneratedTrial trial = generate_trial(config, rng);
    Replication& r = results[i];
    const auto pooled = pool_replication(config, trial.data, r.degenerate);
    if (!pooled) {
      r.excluded = true;
      return;
    }
    const PooledPosterior& pool = *pooled;
    PredictionRequest request{config.objective, config.horizon, config.level, false};
    const PredictionInterval plain = prediction_interval(pool, request);
    request.adjusted = true;
    const PredictionInterval adjusted = prediction_interval(pool, request);

    r.coverage_unadjusted = exact_coverage(trial.rates, plain, config.objective, config.horizon);
    r.coverage_adjusted = exact_coverage(trial.rates, adjusted, config.objective, config.horizon);
    r.width_unadjusted = plain.width();
    r.width_adjusted = adjusted.width();
    r.t_star = pool.t_star;
    r.n_star = pool.n_star;
    r.n_total = static_cast<double>(trial.data.total_count());
    r.mean_exposure = 0.0;
    for (const auto& c : trial.data.centres()) r.mean_exposure += c.exposure;
    r.mean_exposure /= static_cast<double>(trial.data.size());
  });

  CoverageReport report;
  for (const auto& r : results) {
    if (r.degenerate) ++report.degenerate;
    if (r.excluded) {
      ++report.excluded;
    } else {
      ++report.replications;
    }
  }
  if (report.replications == 0) return report;
  report.mean_coverage_unadjusted = 100.0 * mean_of(results, &Replication::coverage_unadjusted);
  report.mean_coverage_adjusted = 100.0 * mean_of(results, &Replication::coverage_adjusted);
  report.mean_width_unadjusted = mean_of(results, &Replication::width_unadjusted);
  report.mean_width_adjusted = mean_of(results, &Replication::width_adjusted);
  report.mean_t_star = mean_of(results, &Replication::t_star);
  report.t_star_ratio = report.mean_t_star / mean_of(results, &Replication::mean_exposure);
  report.n_star_ratio = mean_of(results, &Replication::n_star) / mean_of(results, &Replication::n_total);
  return report;
}

std::vector<double> kernel_density(std::span<const double> samples, std::span<const double> grid) {
  const std::size_t n = samples.size();
  if (n < 100) throw DataError("kernel_density: need at least 100 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double mean = pairwise_sum(sorted) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(n - 1);
    const auto k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    return k + 1 < n ? sorted[k] + frac * (sorted[k + 1] - sorted[k]) : sorted[k];
  };
  const double iqr = (quantile(0.75) - quantile(0.25)) / 1.34;
  double spread = std::min(sd, iqr);
  if (!(spread > 0.0)) spread = std::max(sd, iqr);
  if (!(spread > 0.0)) throw DataError("kernel_density: samples have zero spread (bandwidth 0)");
  const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);

  const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(grid.size(), 0.0);
  const double reach = 8.0 * h;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x = grid[g];
    double s = 0.0;
    // Only samples within the kernel reach contribute noticeably.
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - reach);
    const auto hi = std::upper_bound(sorted.begin(), sorted.end(), x + reach);
    for (auto it = lo; it != hi; ++it) {
      const double z = (x - *it) / h;
      s += std::exp(-0.5 * z * z);
    }
    // reflections about 0 and 1: images at -s and 2 - s
    const auto lo0 = sorted.begin();
    const auto hi0 = std::upper_bound(sorted.begin(), sorted.end(), reach - x);
    for (auto it = lo0; it != hi0; ++it) {
      const double z = (x + *it) / h;
      s += std::exp(-0.5 * z * z);
    }
    const auto lo1 = std::lower_bound(sorted.begin(), sorted.end(), 2.0 - x - reach);
    for (auto it = lo1; it != sorted.end(); ++it) {
      const double z = (x - (2.0 - *it)) / h;
      s += std::exp(-0.5 * z * z);
    }
    out[g] = s * norm;
  }
  return out;
}

double sample_posterior_total_rate(const TrialData& data, const ModelFit& fit, Stream& rng) {
  double total = 0.0;
  for (const auto& c : data.centres()) {
    total += sample_gamma({fit.alpha_hat + static_cast<double>(c.count), fit.beta_hat + c.exposure}, rng);
  }
  return total;
}

}  // namespace recruit
