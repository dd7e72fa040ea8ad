#include "satpos/estimators.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "satpos/ambiguity.hpp"
#include "satpos/errors.hpp"

namespace satpos {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::PseudoRange:
      return "PseudoRange";
    case Method::GenieCP:
      return "GenieCP";
    case Method::BayesFixedPoint:
      return "BayesFixedPoint";
    case Method::BayesMultiStart:
      return "BayesMultiStart";
    case Method::StandardResolution:
      return "StandardResolution";
  }
  return "Unknown";
}

Method method_from_name(std::string_view name) {
  for (Method m : {Method::PseudoRange, Method::GenieCP, Method::BayesFixedPoint,
                   Method::BayesMultiStart, Method::StandardResolution}) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method: " + std::string(name));
}

void to_json(nlohmann::json& j, const EstimateReport& r) {
  const Vector4& w = r.estimate.vec();
  j = {{"method", method_name(r.method)},
       {"estimate", std::vector<double>{w[0], w[1], w[2], w[3]}},
       {"log_likelihood", r.log_likelihood},
       {"iterations", r.iterations},
       {"converged", r.converged},
       {"starts_evaluated", r.starts_evaluated}};
  if (r.resolved_ambiguities) j["resolved_ambiguities"] = *r.resolved_ambiguities;
}

void SolverConfig::validate() const {
  if (!(fp_tol > 0.0)) throw InvalidConfig("fp_tol must be > 0");
  if (fp_max_iter < 1) throw InvalidConfig("fp_max_iter must be >= 1");
  if (!(fp_damping > 0.0 && fp_damping <= 1.0)) throw InvalidConfig("fp_damping must be in (0,1]");
  if (n_starts < 1) throw InvalidConfig("n_starts must be >= 1");
  if (!(start_radius_scale > 0.0)) throw InvalidConfig("start_radius_scale must be > 0");
  if (!(local_ascent_tol > 0.0)) throw InvalidConfig("local_ascent_tol must be > 0");
  if (local_max_iter < 1) throw InvalidConfig("local_max_iter must be >= 1");
}

EstimateReport pr_ls(const Geometry& g, const VectorX& pseudo) {
  const NormalSolver solver(g);
  EstimateReport r;
  r.method = Method::PseudoRange;
  r.estimate = ParameterVector(solver.solve(g.design().transpose() * pseudo));
  r.log_likelihood = -0.5 * (pseudo - g.design() * r.estimate.vec()).squaredNorm();
  return r;
}

Vector4 carrier_combined_solve(const NormalSolver& solver, const Geometry& g,
                               const VectorX& pseudo, const VectorX& carrier,
                               const VectorX& ambiguities, const NoiseModel& nm) {
  const VectorX combined =
      nm.pr_weight() * pseudo + nm.cp_weight() * (carrier - nm.wavelength * ambiguities);
  return solver.solve(g.design().transpose() * combined);
}

EstimateReport genie_cp(const Geometry& g, const MeasurementSet& ms, const NoiseModel& nm) {
  const NormalSolver solver(g);
  EstimateReport r;
  r.method = Method::GenieCP;
  r.estimate = ParameterVector(
      carrier_combined_solve(solver, g, ms.pseudo, ms.carrier, ms.ambiguity_vector(), nm));
  r.log_likelihood = log_likelihood(g, ms.pseudo, ms.carrier, r.estimate, nm);
  return r;
}

namespace {

enum class Need { Value, Gradient, All };

LikelihoodEval accumulate(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                          const Vector4& w, const NoiseModel& nm, Need need) {
  const double inv_var = 1.0 / (nm.sigma * nm.sigma);
  const double inv_var_cp = 1.0 / (nm.sigma_cp * nm.sigma_cp);
  const double lam = nm.wavelength;
  const DesignMatrix& design = g.design();
  const VectorX pred = design * w;

  LikelihoodEval out;
  Eigen::Matrix<double, 4, 4> hess = Matrix4::Zero();
  for (Eigen::Index s = 0; s < pred.size(); ++s) {
    const double r = pseudo[s] - pred[s];
    const double rc = carrier[s] - pred[s];
    const auto mom = posterior_moments(rc, nm);
    out.value += -0.5 * r * r * inv_var + mom.log_mass;
    if (need == Need::Value) continue;
    const double score = r * inv_var + rc * inv_var_cp - lam * inv_var_cp * mom.m1;
    out.gradient += score * design.row(s).transpose();
    if (need == Need::Gradient) continue;
    const double curv = -inv_var - inv_var_cp + lam * lam * inv_var_cp * inv_var_cp * mom.variance();
    hess.selfadjointView<Eigen::Lower>().rankUpdate(design.row(s).transpose(), curv);
  }
  if (need == Need::All) out.hessian = hess.selfadjointView<Eigen::Lower>();
  return out;
}

}  // namespace

LikelihoodEval evaluate_likelihood(const Geometry& g, const VectorX& pseudo,
                                   const VectorX& carrier, const ParameterVector& w,
                                   const NoiseModel& nm) {
  return accumulate(g, pseudo, carrier, w.vec(), nm, Need::All);
}

double log_likelihood(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                      const ParameterVector& w, const NoiseModel& nm) {
  return accumulate(g, pseudo, carrier, w.vec(), nm, Need::Value).value;
}

Vector4 analytic_gradient(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                          const ParameterVector& w, const NoiseModel& nm) {
  return accumulate(g, pseudo, carrier, w.vec(), nm, Need::Gradient).gradient;
}

Matrix4 analytic_hessian(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                         const ParameterVector& w, const NoiseModel& nm) {
  return accumulate(g, pseudo, carrier, w.vec(), nm, Need::All).hessian;
}

double third_derivative(const Eigen::RowVector4d& row, double carrier, const ParameterVector& w,
                        const NoiseModel& nm, int i, int j, int k) {
  const double v = carrier - row.dot(w.vec());
  const auto mom = posterior_moments(v, nm);
  const double lam3 = std::pow(nm.wavelength, 3);
  const double s6 = std::pow(nm.sigma_cp, 6);
  return -row[i] * row[j] * row[k] * lam3 / s6 * mom.third_cumulant();
}

double third_derivative_bound(const NoiseModel& nm) {
  const double big_m = nm.ambiguity_bound;
  return 6.0 * std::pow(big_m, 3) * std::pow(nm.wavelength, 3) / std::pow(nm.sigma_cp, 6);
}

EstimateReport bayes_fixed_point(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                                 const NoiseModel& nm, const SolverConfig& cfg) {
  const NormalSolver solver(g);
  Vector4 w = solver.solve(g.design().transpose() * pseudo);
  double damping = cfg.fp_damping;
  Vector4 prev_step = Vector4::Zero();
  double prev_residual = std::numeric_limits<double>::infinity();

  EstimateReport r;
  r.method = Method::BayesFixedPoint;
  r.converged = false;
  for (int it = 1; it <= cfg.fp_max_iter; ++it) {
    r.iterations = it;
    const VectorX m_hat = mmse_ambiguities(g, carrier, ParameterVector(w), nm);
    const Vector4 residual = carrier_combined_solve(solver, g, pseudo, carrier, m_hat, nm) - w;
    const double res_norm = residual.norm();
    if (res_norm < cfg.fp_tol) {
      r.converged = true;
      break;
    }
    // Halve the damping when the step turns back on the previous one without
    // the residual shrinking. Componentwise sign flips alone are common in
    // transit and are not treated as oscillation.
    const bool reversed = residual.dot(prev_step) < 0.0;
    if (reversed && res_norm >= prev_residual) damping *= 0.5;
    const Vector4 step = damping * residual;
    w += step;
    prev_step = step;
    prev_residual = res_norm;
  }
  r.estimate = ParameterVector(w);
  r.log_likelihood = log_likelihood(g, pseudo, carrier, r.estimate, nm);
  return r;
}

AscentResult local_ascent(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                          const Vector4& start, const NoiseModel& nm, const SolverConfig& cfg) {
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;
  const double fisher_scale = 1.0 / (nm.sigma * nm.sigma) + 1.0 / (nm.sigma_cp * nm.sigma_cp);
  // Curvature floor for the non-concave case: a small fraction of the
  // weakest genie curvature.
  const double curvature_floor =
      1e-2 * fisher_scale *
      Eigen::SelfAdjointEigenSolver<Matrix4>(normal_matrix(g), Eigen::EigenvaluesOnly)
          .eigenvalues()[0];

  AscentResult out;
  out.w = start;
  // Trial points are evaluated in full so an accepted step carries its
  // gradient and Hessian into the next iteration.
  LikelihoodEval ev = accumulate(g, pseudo, carrier, out.w, nm, Need::All);
  out.value = ev.value;
  for (int it = 1; it <= cfg.local_max_iter; ++it) {
    out.iterations = it;
    Vector4 dir;
    const Eigen::LLT<Matrix4> neg_hess(-ev.hessian);
    if (neg_hess.info() == Eigen::Success) {
      dir = neg_hess.solve(ev.gradient);
    } else {
      // Saddle-free Newton: |eigenvalues| of -H, floored, so the step still
      // ascends and negative-curvature directions are followed.
      const Eigen::SelfAdjointEigenSolver<Matrix4> es(-ev.hessian);
      const Vector4 curv = es.eigenvalues().cwiseAbs().cwiseMax(curvature_floor);
      dir = es.eigenvectors() *
            (es.eigenvectors().transpose() * ev.gradient).cwiseQuotient(curv);
    }
    const double slope = ev.gradient.dot(dir);
    if (!(slope > 0.0) || dir.norm() < cfg.local_ascent_tol) {
      out.converged = true;  // stationary to tolerance
      break;
    }
    double t = 1.0;
    LikelihoodEval trial;
    int halvings = 0;
    for (; halvings < kMaxHalvings; ++halvings, t *= 0.5) {
      trial = accumulate(g, pseudo, carrier, out.w + t * dir, nm, Need::All);
      if (trial.value >= ev.value + kArmijo * t * slope) break;
    }
    if (halvings == kMaxHalvings) {
      out.converged = true;  // no further ascent representable
      break;
    }
    const Vector4 step = t * dir;
    out.w += step;
    ev = trial;
    out.value = ev.value;
    if (step.norm() < cfg.local_ascent_tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

EstimateReport bayes_multistart(const Geometry& g, const VectorX& pseudo, const VectorX& carrier,
                                const NoiseModel& nm, const SolverConfig& cfg, RngStream& rng) {
  const NormalSolver solver(g);
  const Vector4 pr = solver.solve(g.design().transpose() * pseudo);
  const Matrix4 start_cov =
      std::pow(cfg.start_radius_scale * nm.sigma, 2) * solver.inverse();
  const Matrix4 start_chol = Eigen::LLT<Matrix4>(start_cov).matrixL();

  std::vector<Vector4> starts;
  starts.reserve(static_cast<std::size_t>(cfg.n_starts) + 2);
  starts.push_back(pr);
  starts.push_back(bayes_fixed_point(g, pseudo, carrier, nm, cfg).estimate.vec());
  for (int i = 0; i < cfg.n_starts; ++i) {
    Vector4 z;
    for (int c = 0; c < 4; ++c) z[c] = rng.normal();
    starts.push_back(pr + start_chol * z);
  }

  EstimateReport r;
  r.method = Method::BayesMultiStart;
  r.log_likelihood = -std::numeric_limits<double>::infinity();
  r.converged = false;
  for (const Vector4& start : starts) {
    const AscentResult a = local_ascent(g, pseudo, carrier, start, nm, cfg);
    r.iterations += a.iterations;
    if (a.value > r.log_likelihood) {
      r.log_likelihood = a.value;
      r.estimate = ParameterVector(a.w);
      r.converged = a.converged;
    }
  }
  r.starts_evaluated = static_cast<int>(starts.size());
  return r;
}

EstimateReport standard_resolution(const Geometry& g, const VectorX& pseudo,
                                   const VectorX& carrier, const NoiseModel& nm) {
  if (!(nm.wavelength > 0.0)) throw WavelengthZero();
  const NormalSolver solver(g);
  const Vector4 w_float = solver.solve(g.design().transpose() * pseudo);
  const VectorX m_float = (carrier - g.design() * w_float) / nm.wavelength;

  const long big_m = nm.ambiguity_bound;
  std::vector<long> fixed(static_cast<std::size_t>(m_float.size()));
  VectorX m_fixed(m_float.size());
  for (Eigen::Index s = 0; s < m_float.size(); ++s) {
    const long m = std::clamp(std::lround(m_float[s]), -big_m, big_m);
    fixed[static_cast<std::size_t>(s)] = m;
    m_fixed[s] = static_cast<double>(m);
  }

  EstimateReport r;
  r.method = Method::StandardResolution;
  r.estimate = ParameterVector(carrier_combined_solve(solver, g, pseudo, carrier, m_fixed, nm));
  r.log_likelihood = log_likelihood(g, pseudo, carrier, r.estimate, nm);
  r.resolved_ambiguities = std::move(fixed);
  return r;
}

}  // namespace satpos
