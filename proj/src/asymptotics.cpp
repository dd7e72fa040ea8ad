#include "satpos/asymptotics.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "satpos/ambiguity.hpp"
#include "satpos/errors.hpp"
#include "satpos/parallel.hpp"
#include "satpos/stats.hpp"

namespace satpos {

Matrix4 q_matrix() {
  Matrix4 q;
  q << 3, 0, 0, 0,
       0, 3, 0, 0,
       0, 0, 12, 6,
       0, 0, 6, 4;
  return q;
}

Matrix4 q_inverse_limit() {
  Matrix4 q;
  q << 1.0 / 3, 0, 0, 0,
       0, 1.0 / 3, 0, 0,
       0, 0, 1.0 / 3, -0.5,
       0, 0, -0.5, 1;
  return q;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double pcorr(double ratio, int sat_count) {
  if (ratio < 0.0) throw std::invalid_argument("ratio must be >= 0");
  if (sat_count < 1) throw std::invalid_argument("sat_count must be >= 1");
  // 1 - 2 Phi(-r/2) = 1 - erfc(r / (2 sqrt 2)); log1p keeps precision near 1.
  const double miss = std::erfc(ratio / (2.0 * std::numbers::sqrt2));
  if (miss >= 1.0) return 0.0;
  return std::exp(sat_count * std::log1p(-miss));
}

namespace {

using Moments = RunningMoments;

struct AmbiguityDraw {
  long m = 0;
  double z = 0.0;
};

AmbiguityDraw draw(RngStream& rng, int big_m) {
  AmbiguityDraw d;
  if (big_m > 0) d.m = rng.uniform_int(-big_m, big_m);
  d.z = rng.normal();
  return d;
}

/// Chunked Monte Carlo over (m, z~) draws; fn maps a draw to K statistics.
template <std::size_t K, typename Fn>
std::array<Moments, K> monte_carlo(long n_samples, int big_m, const RngStream& rng, int threads,
                                   Fn&& fn) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  const long chunks = (n_samples + kMonteCarloChunk - 1) / kMonteCarloChunk;
  auto partial = parallel_map<std::array<Moments, K>>(
      static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
        RngStream sub = rng.substream(c);
        const long begin = static_cast<long>(c) * kMonteCarloChunk;
        const long end = std::min(n_samples, begin + kMonteCarloChunk);
        std::array<Moments, K> acc{};
        for (long i = begin; i < end; ++i) {
          const std::array<double, K> x = fn(draw(sub, big_m));
          for (std::size_t k = 0; k < K; ++k) acc[k].add(x[k]);
        }
        return acc;
      });
  std::array<Moments, K> total{};
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < K; ++k) total[k].merge(p[k]);
  }
  return total;
}

}  // namespace

HCurvePoint h_function(double ratio, int big_m, long n_samples, const RngStream& rng,
                       int threads) {
  if (ratio < 0.0) throw std::invalid_argument("ratio must be >= 0");
  if (big_m < 0) throw std::invalid_argument("M must be >= 0");
  const double a2 = ratio * ratio;
  const auto mc = monte_carlo<1>(n_samples, big_m, rng, threads, [&](const AmbiguityDraw& d) {
    const double v = ratio * static_cast<double>(d.m) + d.z;
    const auto mom = posterior_moments<double>(v, ratio, 1.0, big_m);
    return std::array<double, 1>{1.0 - a2 * mom.variance()};
  });
  HCurvePoint p;
  p.ratio = ratio;
  p.big_m = big_m;
  p.h_value = mc[0].mean;
  p.std_err = mc[0].std_err();
  p.n_samples = mc[0].n;
  return p;
}

MonteCarloValue fisher_factor(const NoiseModel& nm, long n_samples, const RngStream& rng,
                              int threads) {
  const double inv_var = 1.0 / (nm.sigma * nm.sigma);
  const double inv_var_cp = 1.0 / (nm.sigma_cp * nm.sigma_cp);
  const double info_loss = nm.wavelength * nm.wavelength * inv_var_cp * inv_var_cp;
  const auto mc = monte_carlo<1>(
      n_samples, nm.ambiguity_bound, rng, threads, [&](const AmbiguityDraw& d) {
        const double v = nm.wavelength * static_cast<double>(d.m) + nm.sigma_cp * d.z;
        const auto mom = posterior_moments(v, nm);
        return std::array<double, 1>{inv_var + inv_var_cp - info_loss * mom.variance()};
      });
  return {mc[0].mean, mc[0].std_err(), mc[0].n};
}

SteinCheck stein_identity_check(const NoiseModel& nm, long n_samples, const RngStream& rng,
                                int threads) {
  const double scale = nm.wavelength / nm.sigma_cp;
  const auto mc = monte_carlo<3>(
      n_samples, nm.ambiguity_bound, rng, threads, [&](const AmbiguityDraw& d) {
        const double v = nm.wavelength * static_cast<double>(d.m) + nm.sigma_cp * d.z;
        const auto mom = posterior_moments(v, nm);
        const double lhs = d.z * mom.m1;
        const double rhs = scale * mom.variance();
        return std::array<double, 3>{lhs, rhs, lhs - rhs};
      });
  return {mc[0].mean, mc[1].mean, mc[2].std_err(), mc[0].n};
}

Matrix4 predicted_covariance(Method method, const NoiseModel& nm, std::optional<double> h_value) {
  const double inv_var = 1.0 / (nm.sigma * nm.sigma);
  const double inv_var_cp = 1.0 / (nm.sigma_cp * nm.sigma_cp);
  switch (method) {
    case Method::PseudoRange:
      return q_matrix() / inv_var;
    case Method::GenieCP:
      return q_matrix() / (inv_var + inv_var_cp);
    case Method::BayesFixedPoint:
    case Method::BayesMultiStart:
      if (!h_value) throw MissingH();
      return q_matrix() / (inv_var + *h_value * inv_var_cp);
    case Method::StandardResolution:
      break;
  }
  throw std::invalid_argument("no asymptotic covariance prediction for " +
                              std::string(method_name(method)));
}

}  // namespace satpos
