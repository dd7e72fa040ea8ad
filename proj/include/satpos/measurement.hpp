#ifndef SATPOS_MEASUREMENT_HPP
#define SATPOS_MEASUREMENT_HPP

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <vector>

#include "satpos/geometry.hpp"
#include "satpos/rng.hpp"

namespace satpos {

/// Every stochastic-model parameter. Defaults are the error-cdf setting
/// (sigma = 1 m, lambda = 0.19 m, lambda / sigma_cp = 4, M = 20).
struct NoiseModel {
  double sigma = 1.0;          // pseudo-range noise std [m]
  double sigma_cp = 0.0475;    // carrier noise std [m]
  double wavelength = 0.19;    // lambda [m]
  int ambiguity_bound = 20;    // M; ambiguities uniform on {-M..M}

  /// Same sigma / lambda / M, with sigma_cp = lambda / ratio.
  static NoiseModel from_ratio(double sigma, double wavelength, double ratio, int big_m);

  double ratio() const { return wavelength / sigma_cp; }
  double pr_weight() const;  // sigma^-2 / (sigma^-2 + sigma_cp^-2)
  double cp_weight() const;  // sigma_cp^-2 / (sigma^-2 + sigma_cp^-2)

  /// Throws InvalidConfig when an invariant is violated.
  void validate() const;
};

/// w = (x1, x2, x3, b): position error and clock bias, both in meters.
class ParameterVector {
 public:
  ParameterVector() : w_(Vector4::Zero()) {}
  explicit ParameterVector(const Vector4& w) : w_(w) {}
  ParameterVector(const Vector3& position, double clock_bias) {
    w_ << position, clock_bias;
  }

  const Vector4& vec() const { return w_; }
  Vector3 position() const { return w_.head<3>(); }
  double clock_bias() const { return w_[3]; }

 private:
  Vector4 w_;
};

/// Pseudo-ranges, carrier phases and, for simulation, the truth that made them.
struct MeasurementSet {
  VectorX pseudo;                  // y
  VectorX carrier;                 // y~
  std::vector<long> ambiguities;   // m (truth)
  ParameterVector truth;           // w (truth)
  VectorX z;                       // pseudo-range noise draws
  VectorX z_cp;                    // carrier noise draws

  int sat_count() const { return static_cast<int>(pseudo.size()); }
  /// Ambiguities as a real vector, for algebra against the carrier.
  VectorX ambiguity_vector() const;
};

/// Fixed noise draws that replace the random ones; test-only hook.
struct NoiseOverride {
  VectorX z;
  VectorX z_cp;
};

/// y = G w + sigma z, y~ = G w + lambda m + sigma_cp z~ with z, z~ ~ N(0, I)
/// and m uniform on {-M..M}. Draw order per satellite: z_s, z~_s, m_s.
MeasurementSet synthesize(RngStream& rng, const Geometry& g, const ParameterVector& w,
                          const NoiseModel& nm,
                          const std::optional<NoiseOverride>& noise = std::nullopt);

/// Rebuilds y and y~ from the stored truth and noise draws for geometry `g`.
MeasurementSet resynthesize(const Geometry& g, const ParameterVector& w, const NoiseModel& nm,
                            const VectorX& z, const VectorX& z_cp,
                            const std::vector<long>& ambiguities);

/// Density of lambda m + sigma_cp z~ with m uniform on {-M..M}: a
/// (2M+1)-component Gaussian mixture.
double combined_noise_pdf(double v, const NoiseModel& nm);

void to_json(nlohmann::json& j, const NoiseModel& nm);
void to_json(nlohmann::json& j, const MeasurementSet& ms);
void from_json(const nlohmann::json& j, MeasurementSet& ms);

}  // namespace satpos

#endif  // SATPOS_MEASUREMENT_HPP
