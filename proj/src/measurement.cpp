#include "satpos/measurement.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "satpos/errors.hpp"

namespace satpos {

NoiseModel NoiseModel::from_ratio(double sigma, double wavelength, double ratio, int big_m) {
  if (!(ratio > 0.0)) throw InvalidConfig("ratio lambda/sigma_cp must be > 0");
  NoiseModel nm;
  nm.sigma = sigma;
  nm.wavelength = wavelength;
  nm.sigma_cp = wavelength / ratio;
  nm.ambiguity_bound = big_m;
  return nm;
}

double NoiseModel::pr_weight() const {
  const double a = 1.0 / (sigma * sigma);
  const double b = 1.0 / (sigma_cp * sigma_cp);
  return a / (a + b);
}

double NoiseModel::cp_weight() const {
  const double a = 1.0 / (sigma * sigma);
  const double b = 1.0 / (sigma_cp * sigma_cp);
  return b / (a + b);
}

void NoiseModel::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidConfig("sigma must be > 0");
  if (!(sigma_cp > 0.0) || !std::isfinite(sigma_cp)) throw InvalidConfig("sigma_cp must be > 0");
  if (!(wavelength >= 0.0) || !std::isfinite(wavelength)) {
    throw InvalidConfig("wavelength must be >= 0");
  }
  if (ambiguity_bound < 0) throw InvalidConfig("ambiguity bound M must be >= 0");
}

VectorX MeasurementSet::ambiguity_vector() const {
  VectorX m(static_cast<Eigen::Index>(ambiguities.size()));
  for (std::size_t s = 0; s < ambiguities.size(); ++s) {
    m[static_cast<Eigen::Index>(s)] = static_cast<double>(ambiguities[s]);
  }
  return m;
}

MeasurementSet resynthesize(const Geometry& g, const ParameterVector& w, const NoiseModel& nm,
                            const VectorX& z, const VectorX& z_cp,
                            const std::vector<long>& ambiguities) {
  const auto n = static_cast<Eigen::Index>(g.sat_count());
  if (z.size() != n || z_cp.size() != n || static_cast<Eigen::Index>(ambiguities.size()) != n) {
    throw std::invalid_argument("noise draws do not match satellite count");
  }
  MeasurementSet ms;
  ms.truth = w;
  ms.z = z;
  ms.z_cp = z_cp;
  ms.ambiguities = ambiguities;
  const VectorX range = g.design() * w.vec();
  ms.pseudo = range + nm.sigma * z;
  ms.carrier = range + nm.wavelength * ms.ambiguity_vector() + nm.sigma_cp * z_cp;
  return ms;
}

MeasurementSet synthesize(RngStream& rng, const Geometry& g, const ParameterVector& w,
                          const NoiseModel& nm, const std::optional<NoiseOverride>& noise) {
  const int sats = g.sat_count();
  VectorX z(sats), z_cp(sats);
  std::vector<long> m(static_cast<std::size_t>(sats));
  const long big_m = nm.ambiguity_bound;
  for (int s = 0; s < sats; ++s) {
    z[s] = rng.normal();
    z_cp[s] = rng.normal();
    m[static_cast<std::size_t>(s)] = big_m == 0 ? 0 : rng.uniform_int(-big_m, big_m);
  }
  if (noise) {
    z = noise->z;
    z_cp = noise->z_cp;
  }
  return resynthesize(g, w, nm, z, z_cp, m);
}

double combined_noise_pdf(double v, const NoiseModel& nm) {
  const int big_m = nm.ambiguity_bound;
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * nm.sigma_cp);
  double sum = 0.0;
  for (int m = -big_m; m <= big_m; ++m) {
    const double d = (v - nm.wavelength * m) / nm.sigma_cp;
    sum += std::exp(-0.5 * d * d);
  }
  return norm * sum / (2.0 * big_m + 1.0);
}

void to_json(nlohmann::json& j, const NoiseModel& nm) {
  j = {{"sigma", nm.sigma},
       {"sigma_cp", nm.sigma_cp},
       {"wavelength", nm.wavelength},
       {"ambiguity_bound", nm.ambiguity_bound}};
}

namespace {

std::vector<double> to_std(const VectorX& v) { return {v.data(), v.data() + v.size()}; }

VectorX from_std(const std::vector<double>& v) {
  return Eigen::Map<const VectorX>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void to_json(nlohmann::json& j, const MeasurementSet& ms) {
  const Vector4& w = ms.truth.vec();
  j = {{"pseudo", to_std(ms.pseudo)},
       {"carrier", to_std(ms.carrier)},
       {"ambiguities", ms.ambiguities},
       {"truth", std::vector<double>{w[0], w[1], w[2], w[3]}},
       {"z", to_std(ms.z)},
       {"z_cp", to_std(ms.z_cp)}};
}

void from_json(const nlohmann::json& j, MeasurementSet& ms) {
  ms.pseudo = from_std(j.at("pseudo").get<std::vector<double>>());
  ms.carrier = from_std(j.at("carrier").get<std::vector<double>>());
  ms.ambiguities = j.at("ambiguities").get<std::vector<long>>();
  const auto w = j.at("truth").get<std::vector<double>>();
  if (w.size() != 4) throw std::invalid_argument("truth must have 4 entries");
  ms.truth = ParameterVector(Vector4(w[0], w[1], w[2], w[3]));
  ms.z = from_std(j.at("z").get<std::vector<double>>());
  ms.z_cp = from_std(j.at("z_cp").get<std::vector<double>>());
}

}  // namespace satpos
