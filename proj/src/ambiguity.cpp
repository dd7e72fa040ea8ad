#include "satpos/ambiguity.hpp"

#include <algorithm>
#include <stdexcept>

namespace satpos {

double bracket(const BracketQuery& q) {
  if (q.order < 0 || q.order > 3) throw std::invalid_argument("bracket order must be in 0..3");
  if (q.order == 0) return 1.0;
  const auto mom = posterior_moments(q.residual, q.nm);
  switch (q.order) {
    case 1:
      return mom.m1;
    case 2:
      return mom.m2;
    default:
      return mom.m3;
  }
}

DerivativeCheck bracket_derivative_check(double v, int k, const NoiseModel& nm) {
  if (k != 1 && k != 2) throw std::invalid_argument("derivative check supports k = 1, 2");
  const auto mom = posterior_moments(v, nm);
  const double next = k == 1 ? mom.m2 : mom.m3;
  const double cur = k == 1 ? mom.m1 : mom.m2;
  DerivativeCheck out;
  out.analytic = nm.wavelength / (nm.sigma_cp * nm.sigma_cp) * (next - cur * mom.m1);

  const double h = 1e-6 * std::max(nm.sigma_cp, 1e-3);
  const double up = bracket({v + h, k, nm});
  const double down = bracket({v - h, k, nm});
  out.numeric = (up - down) / (2.0 * h);
  return out;
}

VectorX mmse_ambiguities(const Geometry& g, const VectorX& carrier, const ParameterVector& w_hyp,
                         const NoiseModel& nm) {
  const VectorX residual = carrier - g.design() * w_hyp.vec();
  VectorX out(residual.size());
  for (Eigen::Index s = 0; s < residual.size(); ++s) {
    out[s] = posterior_moments(residual[s], nm).m1;
  }
  return out;
}

}  // namespace satpos
