#ifndef SATPOS_ASYMPTOTICS_HPP
#define SATPOS_ASYMPTOTICS_HPP

#include <optional>

#include "satpos/estimators.hpp"
#include "satpos/geometry.hpp"
#include "satpos/measurement.hpp"
#include "satpos/rng.hpp"

namespace satpos {

/// Limit of S (G^T G)^-1 under the uniform-hemisphere model.
Matrix4 q_matrix();

/// Limit of (1/S) G^T G, the inverse of q_matrix().
Matrix4 q_inverse_limit();

/// Standard normal CDF via erfc.
double normal_cdf(double x);

/// Probability that per-satellite rounding with genie position recovers all
/// S ambiguities: (1 - 2 Phi(-ratio / 2))^S.
double pcorr(double ratio, int sat_count);

struct HCurvePoint {
  double ratio = 0.0;
  int big_m = 0;
  double h_value = 1.0;
  double std_err = 0.0;
  long n_samples = 0;
};

/// Monte Carlo samples are drawn in fixed chunks of this size, chunk c from
/// rng.substream(c), so results do not depend on the worker count.
inline constexpr long kMonteCarloChunk = 1L << 15;

/// h_M(a) = 1 - a^2 E[H_2 - H_1^2], m ~ U{-M..M}, z~ ~ N(0,1), evaluated
/// in the unit-noise parameterization (lambda = a, sigma_cp = 1).
HCurvePoint h_function(double ratio, int big_m, long n_samples, const RngStream& rng,
                       int threads = 1);

/// Physical-units form sigma^-2 + sigma_cp^-2 - (lambda^2 / sigma_cp^4) E[Var(m | v)].
/// Uses the same draws as h_function for the same stream.
struct MonteCarloValue {
  double mean = 0.0;
  double std_err = 0.0;
  long n_samples = 0;
};

MonteCarloValue fisher_factor(const NoiseModel& nm, long n_samples, const RngStream& rng,
                              int threads = 1);

/// Paired estimates of E[z~ <m>_{lambda m + sigma_cp z~}] and
/// (lambda / sigma_cp) E[<m^2> - <m>^2], plus the std-err of their difference.
struct SteinCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double diff_std_err = 0.0;
  long n_samples = 0;
};

SteinCheck stein_identity_check(const NoiseModel& nm, long n_samples, const RngStream& rng,
                                int threads = 1);

/// Limit covariance of sqrt(S)(w_hat - w) for `method`. Bayes methods need
/// h_value (throws MissingH); StandardResolution has no prediction.
Matrix4 predicted_covariance(Method method, const NoiseModel& nm,
                             std::optional<double> h_value = std::nullopt);

}  // namespace satpos

#endif  // SATPOS_ASYMPTOTICS_HPP
