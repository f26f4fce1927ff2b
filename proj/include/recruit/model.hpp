#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "recruit/errors.hpp"

namespace recruit {

struct CentreRecord {
  std::string centre_id;
  double exposure = 0.0;  ///< time open before the census
  std::int64_t count = 0; ///< recruits during that time
};

/// Recruitment observed at a census: per-centre exposure and count.
/// Immutable once constructed; the constructor enforces the invariants.
class TrialData {
 public:
  TrialData(double census_time, std::vector<CentreRecord> centres);

  double census_time() const { return census_time_; }
  std::span<const CentreRecord> centres() const { return centres_; }
  std::size_t size() const { return centres_.size(); }
  std::int64_t total_count() const { return total_count_; }

  /// Number of centres with positive exposure.
  std::size_t active_centres() const { return active_; }
  double total_exposure() const { return total_exposure_; }
  /// True when every positive exposure equals the others to relative 1e-12.
  bool equal_exposures() const { return equal_exposures_; }
  /// The common positive exposure; meaningful only when equal_exposures().
  double common_exposure() const { return common_exposure_; }

 private:
  double census_time_;
  std::vector<CentreRecord> centres_;
  std::int64_t total_count_ = 0;
  std::size_t active_ = 0;
  double total_exposure_ = 0.0;
  bool equal_exposures_ = true;
  double common_exposure_ = 0.0;
};

struct ModelFit {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double log_lik = 0.0;
  bool converged = false;
  int iterations = 0;
  bool degenerate = false;
  /// Sup-norm of the analytic gradient in (log alpha, log beta) at the optimum.
  double gradient_norm = 0.0;
  /// Whether the one-dimensional equal-exposure profile was used.
  bool profiled = false;
};

/// The likelihood keeps increasing as alpha, beta grow with fixed ratio.
class DegenerateLikelihood : public DataError {
 public:
  explicit DegenerateLikelihood(ModelFit fit)
      : DataError("degenerate likelihood: maximised at infinity along alpha/beta fixed "
                  "(counts are not over-dispersed)"),
        fit_(fit) {}
  const ModelFit& fit() const noexcept { return fit_; }

 private:
  ModelFit fit_;
};

struct FitOptions {
  /// Nelder-Mead stops when the simplex spread of -loglik drops below this.
  double objective_tolerance = 1e-10;
  int max_iterations = 5000;
  /// Upper bound on log(alpha) beyond which the fit is declared degenerate.
  double log_alpha_bound = 30.0;
  /// Target sup-norm of the log-scale gradient after polishing.
  double gradient_tolerance = 1e-8;
};

/// Marginal log-likelihood of the gamma-Poisson model, up to an additive
/// constant that depends on the data only.
double log_likelihood(double alpha, double beta, const TrialData& data);

/// Analytic gradient of log_likelihood with respect to (log alpha, log beta).
std::pair<double, double> log_likelihood_gradient(double alpha, double beta,
                                                  const TrialData& data);

/// Maximum-likelihood estimate of (alpha, beta).
/// Throws InsufficientData when no recruits or no exposure, and
/// DegenerateLikelihood on a monotone likelihood.
ModelFit fit_mle(const TrialData& data, const FitOptions& options = {});

struct RateMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Moments of the total rate under the plug-in posterior
/// lambda_c | n_c ~ Gam(alpha_hat + n_c, beta_hat + t_c).
RateMoments posterior_rate_moments(const TrialData& data, const ModelFit& fit);

}  // namespace recruit
