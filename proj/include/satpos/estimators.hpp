#ifndef SATPOS_ESTIMATORS_HPP
#define SATPOS_ESTIMATORS_HPP

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string_view>
#include <vector>

#include "satpos/geometry.hpp"
#include "satpos/measurement.hpp"
#include "satpos/rng.hpp"

namespace satpos {

enum class Method { PseudoRange, GenieCP, BayesFixedPoint, BayesMultiStart, StandardResolution };

/// Bit-exact names used in CSV columns and JSON.
std::string_view method_name(Method m);
Method method_from_name(std::string_view name);

struct EstimateReport {
  ParameterVector estimate;
  Method method = Method::PseudoRange;
  double log_likelihood = 0.0;  // sum of per-satellite terms, log C omitted
  int iterations = 0;
  bool converged = true;
  int starts_evaluated = 0;
  std::optional<std::vector<long>> resolved_ambiguities;
};

void to_json(nlohmann::json& j, const EstimateReport& r);

struct SolverConfig {
  double fp_tol = 1e-9;           // [m]
  int fp_max_iter = 500;
  double fp_damping = 1.0;        // initial; halved on oscillation
  int n_starts = 200;
  double start_radius_scale = 3.0;
  double local_ascent_tol = 1e-10;  // [m]
  int local_max_iter = 100;

  void validate() const;
};

/// Least squares (G^T G)^-1 G^T y. Without a noise model the reported
/// log-likelihood is the unit-variance pseudo-range term -|y - G w|^2 / 2.
EstimateReport pr_ls(const Geometry& g, const VectorX& pseudo);

/// Carrier-phase estimate with the true ambiguities from `ms` (genie).
EstimateReport genie_cp(const Geometry& g, const MeasurementSet& ms, const NoiseModel& nm);

/// Genie formula with an arbitrary ambiguity vector:
/// (G^T G)^-1 G^T [alpha y + beta (y~ - lambda m)].
Vector4 carrier_combined_solve(const NormalSolver& solver, const Geometry& g,
                               const VectorX& pseudo, const VectorX& carrier,
                               const VectorX& ambiguities, const NoiseModel& nm);

/// Log-likelihood with ambiguities marginalized, up to the w-independent log C.
double log_likelihood(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                      const ParameterVector& w, const NoiseModel& nm);

Vector4 analytic_gradient(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                          const ParameterVector& w, const NoiseModel& nm);

Matrix4 analytic_hessian(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                         const ParameterVector& w, const NoiseModel& nm);

/// Value, gradient and Hessian from a single pass over the satellites.
struct LikelihoodEval {
  double value = 0.0;
  Vector4 gradient = Vector4::Zero();
  Matrix4 hessian = Matrix4::Zero();
};

LikelihoodEval evaluate_likelihood(const Geometry& g, const VectorX& pseudo,
                                   const VectorX& carrier, const ParameterVector& w,
                                   const NoiseModel& nm);

/// d^3 l / dw_i dw_j dw_k for one satellite with design row `row`.
double third_derivative(const Eigen::RowVector4d& row, double carrier, const ParameterVector& w,
                        const NoiseModel& nm, int i, int j, int k);

/// Uniform bound 6 M^3 lambda^3 / sigma_cp^6 on every third partial derivative.
double third_derivative_bound(const NoiseModel& nm);

/// Picard iteration on the fixed-point form of the likelihood equation,
/// started at the pseudo-range estimate. Returns converged = false rather
/// than throwing when fp_max_iter is exhausted.
EstimateReport bayes_fixed_point(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                                 const NoiseModel& nm, const SolverConfig& cfg = {});

/// Local ascent result from one start.
struct AscentResult {
  Vector4 w;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton ascent on the log-likelihood. Where the Hessian is not
/// negative definite the step is a gradient step preconditioned by |H| (its
/// eigenvalues made positive and floored). Backtracking with Armijo
/// constant 1e-4.
AscentResult local_ascent(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                          const Vector4& start, const NoiseModel& nm, const SolverConfig& cfg);

/// Global likelihood maximization: local ascent from the pseudo-range
/// estimate, the fixed-point solution, and cfg.n_starts Gaussian draws around
/// the pseudo-range estimate with covariance (scale sigma)^2 (G^T G)^-1.
EstimateReport bayes_multistart(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                                const NoiseModel& nm, const SolverConfig& cfg, RngStream& rng);

/// Float / fix / (no validation) / solve baseline with per-satellite rounding.
EstimateReport standard_resolution(const Geometry& g, const VectorX& pseudo,
                                   const VectorX& carrier, const NoiseModel& nm);

}  // namespace satpos

#endif  // SATPOS_ESTIMATORS_HPP
