#ifndef SATPOS_AMBIGUITY_HPP
#define SATPOS_AMBIGUITY_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "satpos/geometry.hpp"
#include "satpos/measurement.hpp"

namespace satpos {

/// Posterior moments <m^k>_v, k = 1..3, of an ambiguity m uniform on {-M..M}
/// given the carrier residual v = lambda m + sigma_cp z~.
template <typename Scalar>
struct PosteriorMoments {
  Scalar m1{0};
  Scalar m2{0};
  Scalar m3{0};
  /// log of sum_m f_v(m), f_v(m) = exp(-(lambda m - v)^2 / (2 sigma_cp^2)).
  Scalar log_mass{0};

  Scalar variance() const { return m2 - m1 * m1; }
  /// <m^3> - 3 <m^2><m> + 2 <m>^3, the factor in the third log-likelihood derivative.
  Scalar third_cumulant() const { return m3 - Scalar(3) * m2 * m1 + Scalar(2) * m1 * m1 * m1; }
};

namespace detail {

/// Terms whose exponent sits more than this below the maximum are dropped;
/// exp(-60) is far below double epsilon relative to the leading term.
inline constexpr double kExponentCutoff = 60.0;

}  // namespace detail

/// All moments in one pass. Exponents are shifted by their maximum, so the
/// result is finite for any v, including |v| >> lambda M.
template <typename Scalar>
PosteriorMoments<Scalar> posterior_moments(Scalar v, Scalar wavelength, Scalar sigma_cp,
                                           int big_m) {
  PosteriorMoments<Scalar> out;
  const Scalar inv_two_var = Scalar(1) / (Scalar(2) * sigma_cp * sigma_cp);
  if (big_m == 0) {
    out.log_mass = -v * v * inv_two_var;
    return out;
  }
  long lo = -big_m;
  long hi = big_m;
  long peak = 0;
  if (wavelength > Scalar(0)) {
    const Scalar center = v / wavelength;
    peak = std::clamp(static_cast<long>(std::llround(std::clamp<Scalar>(center, -big_m, big_m))),
                      -static_cast<long>(big_m), static_cast<long>(big_m));
  }
  const Scalar peak_dev = wavelength * Scalar(peak) - v;
  const Scalar peak_exp = -peak_dev * peak_dev * inv_two_var;
  if (wavelength > Scalar(0)) {
    // Keep m with (lambda m - v)^2 <= peak_dev^2 + 2 cutoff sigma_cp^2.
    const Scalar reach = std::sqrt(peak_dev * peak_dev +
                                   Scalar(2 * detail::kExponentCutoff) * sigma_cp * sigma_cp);
    const Scalar below = std::floor((v - reach) / wavelength);
    const Scalar above = std::ceil((v + reach) / wavelength);
    if (below > Scalar(lo)) lo = static_cast<long>(below);
    if (above < Scalar(hi)) hi = static_cast<long>(above);
    lo = std::min(lo, peak);
    hi = std::max(hi, peak);
  }
  Scalar s0{0}, s1{0}, s2{0}, s3{0};
  for (long m = lo; m <= hi; ++m) {
    const Scalar dev = wavelength * Scalar(m) - v;
    const Scalar f = std::exp(-dev * dev * inv_two_var - peak_exp);
    const Scalar mm = Scalar(m);
    s0 += f;
    s1 += f * mm;
    s2 += f * mm * mm;
    s3 += f * mm * mm * mm;
  }
  out.m1 = s1 / s0;
  out.m2 = s2 / s0;
  out.m3 = s3 / s0;
  out.log_mass = peak_exp + std::log(s0);
  return out;
}

inline PosteriorMoments<double> posterior_moments(double v, const NoiseModel& nm) {
  return posterior_moments<double>(v, nm.wavelength, nm.sigma_cp, nm.ambiguity_bound);
}

struct BracketQuery {
  double residual = 0.0;  // v [m]
  int order = 1;          // k, 0..3
  NoiseModel nm;
};

/// <m^k>_v. M = 0 gives 1 for k = 0 and 0 otherwise.
double bracket(const BracketQuery& q);

struct DerivativeCheck {
  double analytic = 0.0;
  double numeric = 0.0;
};

/// d<m^k>_v/dv two ways: (lambda / sigma_cp^2)(<m^{k+1}> - <m^k><m>) and a
/// central difference with step 1e-6 * max(sigma_cp, 1e-3). k in {1, 2}.
DerivativeCheck bracket_derivative_check(double v, int k, const NoiseModel& nm);

/// Conditional-mean ambiguities E_w(m_s | y~, G) = <m>_{y~_s - g_s^T w}.
VectorX mmse_ambiguities(const Geometry& g, const VectorX& carrier, const ParameterVector& w_hyp,
                         const NoiseModel& nm);

}  // namespace satpos

#endif  // SATPOS_AMBIGUITY_HPP
