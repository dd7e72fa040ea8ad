#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>

#include "satpos/ambiguity.hpp"
#include "satpos/asymptotics.hpp"
#include "satpos/estimators.hpp"
#include "satpos/stats.hpp"

using namespace satpos;

namespace {

struct Instance {
  Geometry g;
  MeasurementSet ms;
};

Instance make_instance(std::uint64_t seed, int sats, const NoiseModel& nm,
                       const ParameterVector& w = ParameterVector(), bool zero_noise = false) {
  RngStream rng(seed);
  Geometry g = sample_hemisphere(rng, sats);
  std::optional<NoiseOverride> noise;
  if (zero_noise) noise = NoiseOverride{VectorX::Zero(sats), VectorX::Zero(sats)};
  MeasurementSet ms = synthesize(rng, g, w, nm, noise);
  return {std::move(g), std::move(ms)};
}

double max_abs(const Vector4& v) { return v.cwiseAbs().maxCoeff(); }

// Central differences of the log-likelihood, step scaled to sigma_cp.
Vector4 fd_gradient(const Instance& in, const Vector4& w, const NoiseModel& nm) {
  const double h = 1e-5 * nm.sigma_cp;
  Vector4 out;
  for (int i = 0; i < 4; ++i) {
    Vector4 e = Vector4::Zero();
    e[i] = h;
    out[i] = (log_likelihood(in.g, in.ms.pseudo, in.ms.carrier, ParameterVector(w + e), nm) -
              log_likelihood(in.g, in.ms.pseudo, in.ms.carrier, ParameterVector(w - e), nm)) /
             (2.0 * h);
  }
  return out;
}

Matrix4 fd_hessian(const Instance& in, const Vector4& w, const NoiseModel& nm) {
  const double h = 1e-6 * nm.sigma_cp;
  Matrix4 out;
  for (int j = 0; j < 4; ++j) {
    Vector4 e = Vector4::Zero();
    e[j] = h;
    out.col(j) =
        (analytic_gradient(in.g, in.ms.pseudo, in.ms.carrier, ParameterVector(w + e), nm) -
         analytic_gradient(in.g, in.ms.pseudo, in.ms.carrier, ParameterVector(w - e), nm)) /
        (2.0 * h);
  }
  return out;
}

double frobenius_rel(const Matrix4& emp, const Matrix4& pred) {
  return (emp - pred).norm() / pred.norm();
}

}  // namespace

TEST_CASE("method names are bit-exact and round trip") {
  CHECK(method_name(Method::PseudoRange) == "PseudoRange");
  CHECK(method_name(Method::GenieCP) == "GenieCP");
  CHECK(method_name(Method::BayesFixedPoint) == "BayesFixedPoint");
  CHECK(method_name(Method::BayesMultiStart) == "BayesMultiStart");
  CHECK(method_name(Method::StandardResolution) == "StandardResolution");
  for (Method m : {Method::PseudoRange, Method::GenieCP, Method::BayesFixedPoint,
                   Method::BayesMultiStart, Method::StandardResolution}) {
    CHECK(method_from_name(method_name(m)) == m);
  }
  CHECK_THROWS(method_from_name("Lambda"));
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.fp_damping = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = SolverConfig{};
  cfg.n_starts = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = SolverConfig{};
  cfg.fp_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}

TEST_CASE("report JSON") {
  const NoiseModel nm;
  const Instance in = make_instance(1, 12, nm);
  const EstimateReport r = standard_resolution(in.g, in.ms.pseudo, in.ms.carrier, nm);
  const nlohmann::json j = r;
  CHECK(j.at("method") == "StandardResolution");
  CHECK(j.at("resolved_ambiguities").size() == 12);
  CHECK(j.at("estimate").size() == 4);
}

TEST_CASE("pseudo-range least squares") {
  const NoiseModel nm;
  const ParameterVector w(Vector3(1.5, -0.5, 2.0), -3.0);
  const Instance in = make_instance(2, 10, nm, w, true);
  const EstimateReport r = pr_ls(in.g, in.ms.pseudo);
  CHECK(r.method == Method::PseudoRange);
  CHECK(max_abs(r.estimate.vec() - w.vec()) <= 1e-10);
  CHECK(max_abs(pr_ls(in.g, VectorX::Zero(10)).estimate.vec()) == 0.0);

  RngStream rng(3);
  CHECK_THROWS_AS(pr_ls(sample_hemisphere(rng, 3), VectorX::Zero(3)), SingularGeometry);
}

TEST_CASE("genie carrier-phase estimator") {
  const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 4.0, 20);
  const ParameterVector w(Vector3(0.3, 0.2, -0.7), 1.1);
  const Instance zero = make_instance(4, 10, nm, w, true);
  CHECK(max_abs(genie_cp(zero.g, zero.ms, nm).estimate.vec() - w.vec()) <= 1e-10);

  // sigma_cp = sigma: equal weights, so the genie is LS on the averaged data.
  NoiseModel eq = nm;
  eq.sigma_cp = eq.sigma;
  const Instance in = make_instance(5, 10, eq, w);
  const VectorX avg = 0.5 * (in.ms.pseudo + in.ms.carrier - eq.wavelength * in.ms.ambiguity_vector());
  CHECK(max_abs(genie_cp(in.g, in.ms, eq).estimate.vec() - pr_ls(in.g, avg).estimate.vec()) <=
        1e-12);
}

TEST_CASE("limit covariances at S = 100") {
  const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 4.0, 20);
  const int sats = 100, trials = 5000;
  RngStream master(6);
  std::vector<Vector4> pr, genie;
  for (int t = 0; t < trials; ++t) {
    RngStream rng = master.substream(t);
    const Geometry g = sample_hemisphere(rng, sats);
    const MeasurementSet ms = synthesize(rng, g, ParameterVector(), nm);
    pr.push_back(std::sqrt(sats) * pr_ls(g, ms.pseudo).estimate.vec());
    genie.push_back(std::sqrt(sats) * genie_cp(g, ms, nm).estimate.vec());
  }
  auto cov = [](const std::vector<Vector4>& xs) {
    Vector4 mean = Vector4::Zero();
    for (const auto& x : xs) mean += x;
    mean /= xs.size();
    Matrix4 c = Matrix4::Zero();
    for (const auto& x : xs) c += (x - mean) * (x - mean).transpose();
    return Matrix4(c / (xs.size() - 1.0));
  };
  CHECK(frobenius_rel(cov(pr), predicted_covariance(Method::PseudoRange, nm)) <= 0.15);
  CHECK(frobenius_rel(cov(genie), predicted_covariance(Method::GenieCP, nm)) <= 0.15);
}

TEST_CASE("log-likelihood with a single-term inner sum") {
  const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 4.0, 0);
  const Instance in = make_instance(7, 15, nm);
  const ParameterVector w(Vector3(0.01, -0.02, 0.03), 0.05);
  const VectorX gw = in.g.design() * w.vec();
  const double expected = -((gw - in.ms.pseudo).squaredNorm() / (2.0 * nm.sigma * nm.sigma) +
                            (gw - in.ms.carrier).squaredNorm() /
                                (2.0 * nm.sigma_cp * nm.sigma_cp));
  CHECK(log_likelihood(in.g, in.ms.pseudo, in.ms.carrier, w, nm) ==
        doctest::Approx(expected).epsilon(1e-13));
  const Matrix4 hess = analytic_hessian(in.g, in.ms.pseudo, in.ms.carrier, w, nm);
  const Matrix4 genie = -(1.0 / (nm.sigma * nm.sigma) + 1.0 / (nm.sigma_cp * nm.sigma_cp)) *
                        normal_matrix(in.g);
  CHECK((hess - genie).cwiseAbs().maxCoeff() <= 1e-9 * genie.cwiseAbs().maxCoeff());
}

TEST_CASE("clock translation consistency") {
  const NoiseModel nm;
  const Instance in = make_instance(8, 20, nm);
  const double delta = 0.37;
  const VectorX y2 = in.ms.pseudo.array() + delta;
  const VectorX c2 = in.ms.carrier.array() + delta;
  for (int k = 0; k < 5; ++k) {
    const Vector4 w(0.05 * k, -0.02 * k, 0.01, 0.1 * k);
    Vector4 shifted = w;
    shifted[3] += delta;
    CHECK(log_likelihood(in.g, y2, c2, ParameterVector(shifted), nm) ==
          doctest::Approx(log_likelihood(in.g, in.ms.pseudo, in.ms.carrier, ParameterVector(w), nm))
              .epsilon(1e-12));
  }
}

TEST_CASE("gradient and Hessian against finite differences") {
  RngStream pick(9);
  for (auto [ratio, big_m] : {std::pair{4.0, 20}, {8.0, 20}, {2.0, 3}}) {
    const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, ratio, big_m);
    const Instance in = make_instance(10 + big_m, 30, nm);
    for (int p = 0; p < 20; ++p) {
      Vector4 w;
      for (int i = 0; i < 4; ++i) w[i] = 0.3 * pick.normal();
      const LikelihoodEval ev =
          evaluate_likelihood(in.g, in.ms.pseudo, in.ms.carrier, ParameterVector(w), nm);
      const Vector4 grad = analytic_gradient(in.g, in.ms.pseudo, in.ms.carrier, ParameterVector(w), nm);
      const Matrix4 hess = analytic_hessian(in.g, in.ms.pseudo, in.ms.carrier, ParameterVector(w), nm);
      CHECK(ev.gradient == grad);
      CHECK(ev.hessian == hess);
      CHECK(hess == hess.transpose());

      // Relative to the gradient's natural scale, sum_s |g_s| / sigma_cp^2.
      const double gscale = std::max(grad.norm(), 1.0);
      CHECK((grad - fd_gradient(in, w, nm)).norm() <= 1e-5 * gscale);
      const double hscale = hess.norm();
      CHECK((hess - fd_hessian(in, w, nm)).norm() <= 1e-4 * hscale);
    }
  }
}

TEST_CASE("weighted LS gradient when M = 0 and lambda = 0") {
  NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 4.0, 0);
  nm.wavelength = 0.0;
  const Instance in = make_instance(12, 10, nm);
  const Vector4 w(0.1, 0.2, 0.3, 0.4);
  const VectorX gw = in.g.design() * w;
  const Vector4 expected = in.g.design().transpose() *
                           ((in.ms.pseudo - gw) / (nm.sigma * nm.sigma) +
                            (in.ms.carrier - gw) / (nm.sigma_cp * nm.sigma_cp));
  CHECK((analytic_gradient(in.g, in.ms.pseudo, in.ms.carrier, ParameterVector(w), nm) - expected)
            .norm() <= 1e-9 * expected.norm());
}

TEST_CASE("gradient summand has zero mean at the truth") {
  const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 4.0, 20);
  RngStream master(13);
  RunningMoments comp[4];
  for (int t = 0; t < 100'000; ++t) {
    RngStream rng = master.substream(t);
    const Geometry g = sample_hemisphere(rng, 1);
    const MeasurementSet ms = synthesize(rng, g, ParameterVector(), nm);
    const Vector4 grad = analytic_gradient(g, ms.pseudo, ms.carrier, ParameterVector(), nm);
    for (int i = 0; i < 4; ++i) comp[i].add(grad[i]);
  }
  for (int i = 0; i < 4; ++i) {
    INFO("component " << i);
    CHECK(std::abs(comp[i].mean) <= 4.0 * comp[i].std_err());
  }
}

TEST_CASE("third derivative bound") {
  SUBCASE("M = 0 and scaling in M") {
    CHECK(third_derivative_bound(NoiseModel::from_ratio(1.0, 0.19, 4.0, 0)) == 0.0);
    const double b10 = third_derivative_bound(NoiseModel::from_ratio(1.0, 0.19, 4.0, 10));
    const double b20 = third_derivative_bound(NoiseModel::from_ratio(1.0, 0.19, 4.0, 20));
    CHECK(b20 / b10 == doctest::Approx(8.0).epsilon(1e-14));
  }
  SUBCASE("1000 sampled points") {
    RngStream rng(14);
    for (auto [ratio, big_m] : {std::pair{2.0, 3}, {4.0, 20}, {8.0, 20}, {1.0, 1}}) {
      const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, ratio, big_m);
      const double bound = third_derivative_bound(nm);
      double worst = 0.0;
      for (int p = 0; p < 1000; ++p) {
        const Geometry g = sample_hemisphere(rng, 1);
        const double v = (2.0 * rng.uniform() - 1.0) * nm.wavelength * (big_m + 2);
        const int i = static_cast<int>(rng.uniform_int(0, 3));
        const int j = static_cast<int>(rng.uniform_int(0, 3));
        const int k = static_cast<int>(rng.uniform_int(0, 3));
        const double d3 = third_derivative(g.row(0), v, ParameterVector(), nm, i, j, k);
        worst = std::max(worst, std::abs(d3));
      }
      INFO("ratio " << ratio << " M " << big_m);
      CHECK(worst <= bound);
    }
  }
  SUBCASE("matches a finite difference of the Hessian") {
    const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 2.0, 3);
    RngStream rng(15);
    const Geometry g = sample_hemisphere(rng, 1);
    const VectorX pseudo = VectorX::Zero(1);
    VectorX carrier(1);
    carrier << 0.13;
    const Vector4 w(0.01, 0.02, -0.01, 0.03);
    const double h = 1e-6;
    for (int k = 0; k < 4; ++k) {
      Vector4 e = Vector4::Zero();
      e[k] = h;
      const Matrix4 fd = (analytic_hessian(g, pseudo, carrier, ParameterVector(w + e), nm) -
                          analytic_hessian(g, pseudo, carrier, ParameterVector(w - e), nm)) /
                         (2.0 * h);
      for (int i = 0; i < 4; ++i) {
        const double d3 = third_derivative(g.row(0), carrier[0], ParameterVector(w), nm, i, i, k);
        CHECK(d3 == doctest::Approx(fd(i, i)).epsilon(1e-5).scale(1.0));
      }
    }
  }
}

TEST_CASE("fixed point collapses to the genie when there is nothing to resolve") {
  const ParameterVector w(Vector3(0.2, 0.1, 0.0), -0.3);
  NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 4.0, 0);
  const Instance in = make_instance(16, 12, nm, w);
  EstimateReport fp = bayes_fixed_point(in.g, in.ms.pseudo, in.ms.carrier, nm);
  const NormalSolver solver(in.g);
  const Vector4 genie =
      carrier_combined_solve(solver, in.g, in.ms.pseudo, in.ms.carrier, VectorX::Zero(12), nm);
  CHECK(fp.converged);
  CHECK(fp.iterations <= 2);
  CHECK(max_abs(fp.estimate.vec() - genie) <= 1e-12);

  nm = NoiseModel::from_ratio(1.0, 0.19, 4.0, 20);
  nm.wavelength = 0.0;
  fp = bayes_fixed_point(in.g, in.ms.pseudo, in.ms.carrier, nm);
  CHECK(fp.converged);
  CHECK(fp.iterations <= 2);
  CHECK(max_abs(fp.estimate.vec() - genie) <= 1e-12);
}

TEST_CASE("fixed point is a stationary point of the likelihood") {
  RngStream master(17);
  int converged = 0;
  for (auto [ratio, sats] : {std::pair{4.0, 50}, {8.0, 50}, {2.0, 20}, {8.0, 200}}) {
    const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, ratio, 20);
    const double scale = (1.0 / (nm.sigma * nm.sigma) + 1.0 / (nm.sigma_cp * nm.sigma_cp)) * sats;
    for (int t = 0; t < 10; ++t) {
      const Instance in = make_instance(master.substream(t * 1000 + sats).seed(), sats, nm);
      SolverConfig cfg;
      // At ratio 2 the map contracts slowly (rate near 1 - h), so allow more sweeps.
      if (ratio < 3.0) cfg.fp_max_iter = 5000;
      const EstimateReport fp = bayes_fixed_point(in.g, in.ms.pseudo, in.ms.carrier, nm, cfg);
      if (!fp.converged) continue;
      ++converged;
      const Vector4 grad =
          analytic_gradient(in.g, in.ms.pseudo, in.ms.carrier, fp.estimate, nm);
      CHECK(grad.norm() <= 1e-6 * scale);
      // Fixed-point residual of the map itself.
      const NormalSolver solver(in.g);
      const Vector4 mapped = carrier_combined_solve(
          solver, in.g, in.ms.pseudo, in.ms.carrier,
          mmse_ambiguities(in.g, in.ms.carrier, fp.estimate, nm), nm);
      CHECK((mapped - fp.estimate.vec()).norm() <= 10.0 * cfg.fp_tol);
    }
  }
  CHECK(converged == 40);
}

TEST_CASE("fixed point reports nonconvergence instead of throwing") {
  const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 4.0, 20);
  const Instance in = make_instance(18, 50, nm);
  SolverConfig cfg;
  cfg.fp_max_iter = 1;
  const EstimateReport fp = bayes_fixed_point(in.g, in.ms.pseudo, in.ms.carrier, nm, cfg);
  CHECK_FALSE(fp.converged);
  CHECK(fp.iterations == 1);
  CHECK(std::isfinite(fp.log_likelihood));
}

TEST_CASE("multi-start") {
  SUBCASE("unimodal case agrees with the fixed point") {
    const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 4.0, 0);
    const Instance in = make_instance(19, 20, nm);
    SolverConfig cfg;
    cfg.n_starts = 20;
    RngStream rng(1);
    const EstimateReport ms = bayes_multistart(in.g, in.ms.pseudo, in.ms.carrier, nm, cfg, rng);
    const EstimateReport fp = bayes_fixed_point(in.g, in.ms.pseudo, in.ms.carrier, nm, cfg);
    CHECK(max_abs(ms.estimate.vec() - fp.estimate.vec()) <= 1e-6);
    CHECK(ms.starts_evaluated == cfg.n_starts + 2);
  }
  SUBCASE("dominance over the PR estimate and the fixed point") {
    const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 4.0, 20);
    SolverConfig cfg;
    cfg.n_starts = 30;
    for (int t = 0; t < 10; ++t) {
      const Instance in = make_instance(200 + t, 50, nm);
      RngStream rng(t);
      const EstimateReport ms = bayes_multistart(in.g, in.ms.pseudo, in.ms.carrier, nm, cfg, rng);
      const EstimateReport fp = bayes_fixed_point(in.g, in.ms.pseudo, in.ms.carrier, nm, cfg);
      const double at_pr = log_likelihood(in.g, in.ms.pseudo, in.ms.carrier,
                                          pr_ls(in.g, in.ms.pseudo).estimate, nm);
      CHECK(ms.log_likelihood >= at_pr);
      CHECK(ms.log_likelihood >= fp.log_likelihood);
      CHECK(ms.log_likelihood ==
            doctest::Approx(log_likelihood(in.g, in.ms.pseudo, in.ms.carrier, ms.estimate, nm)));
    }
  }
  SUBCASE("deterministic given the stream") {
    const NoiseModel nm;
    const Instance in = make_instance(21, 30, nm);
    SolverConfig cfg;
    cfg.n_starts = 15;
    RngStream a(5), b(5);
    const auto ra = bayes_multistart(in.g, in.ms.pseudo, in.ms.carrier, nm, cfg, a);
    const auto rb = bayes_multistart(in.g, in.ms.pseudo, in.ms.carrier, nm, cfg, b);
    CHECK(ra.estimate.vec() == rb.estimate.vec());
  }
  SUBCASE("zero-noise carrier at ratio 8: the truth is recovered") {
    const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 8.0, 20);
    const ParameterVector w(Vector3(0.5, -0.25, 1.0), 2.0);
    const Instance in = make_instance(22, 40, nm, w, true);
    SolverConfig cfg;
    cfg.n_starts = 20;
    RngStream rng(3);
    const auto r = bayes_multistart(in.g, in.ms.pseudo, in.ms.carrier, nm, cfg, rng);
    // The edge of the ambiguity prior pulls the estimate slightly, so not exact.
    CHECK(max_abs(r.estimate.vec() - w.vec()) <= 1e-3);
  }
}

TEST_CASE("multi-start beats pseudo-range by a factor 5 at ratio 8, S = 200") {
  const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 8.0, 20);
  RngStream master(23);
  std::vector<double> pr_err, bayes_err;
  for (int t = 0; t < 500; ++t) {
    RngStream rng = master.substream(t);
    const Geometry g = sample_hemisphere(rng, 200);
    const MeasurementSet ms = synthesize(rng, g, ParameterVector(), nm);
    pr_err.push_back(pr_ls(g, ms.pseudo).estimate.position().norm());
    bayes_err.push_back(
        bayes_multistart(g, ms.pseudo, ms.carrier, nm, SolverConfig{}, rng).estimate.position().norm());
  }
  CHECK(median(pr_err) >= 5.0 * median(bayes_err));
}

TEST_CASE("standard resolution") {
  const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 4.0, 20);
  SUBCASE("zero noise resolves exactly") {
    const ParameterVector w(Vector3(0.01, 0.02, 0.0), 0.05);
    const Instance in = make_instance(24, 30, nm, w, true);
    const auto r = standard_resolution(in.g, in.ms.pseudo, in.ms.carrier, nm);
    CHECK(r.method == Method::StandardResolution);
    REQUIRE(r.resolved_ambiguities.has_value());
    CHECK(*r.resolved_ambiguities == in.ms.ambiguities);
    CHECK(max_abs(r.estimate.vec() - w.vec()) <= 1e-10);
  }
  SUBCASE("zero wavelength is rejected") {
    NoiseModel z = nm;
    z.wavelength = 0.0;
    const Instance in = make_instance(25, 10, nm);
    CHECK_THROWS_AS(standard_resolution(in.g, in.ms.pseudo, in.ms.carrier, z), WavelengthZero);
  }
  SUBCASE("resolved ambiguities stay in the support") {
    const Instance in = make_instance(26, 50, NoiseModel::from_ratio(1.0, 0.19, 0.5, 2));
    const auto r =
        standard_resolution(in.g, in.ms.pseudo, in.ms.carrier, NoiseModel::from_ratio(1.0, 0.19, 0.5, 2));
    for (long m : *r.resolved_ambiguities) CHECK(std::abs(m) <= 2);
  }
  SUBCASE("near-perfect pseudo-range and ratio 20 resolve almost always") {
    const NoiseModel sharp = NoiseModel::from_ratio(1e-6, 0.19, 20.0, 20);
    int ok = 0;
    for (int t = 0; t < 100; ++t) {
      const Instance in = make_instance(300 + t, 20, sharp);
      const auto r = standard_resolution(in.g, in.ms.pseudo, in.ms.carrier, sharp);
      ok += *r.resolved_ambiguities == in.ms.ambiguities;
    }
    CHECK(ok >= 99);
  }
  SUBCASE("success at ratio 4, S = 50 falls below the genie bound") {
    int ok = 0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
      const Instance in = make_instance(1000 + t, 50, nm);
      const auto r = standard_resolution(in.g, in.ms.pseudo, in.ms.carrier, nm);
      ok += *r.resolved_ambiguities == in.ms.ambiguities;
    }
    CHECK(static_cast<double>(ok) / trials < pcorr(4.0, 50));
  }
}

TEST_CASE("estimators are equivariant in the clock bias") {
  const NoiseModel nm = NoiseModel::from_ratio(1.0, 0.19, 4.0, 20);
  RngStream rng(27);
  const Geometry g = sample_hemisphere(rng, 30);
  const MeasurementSet base = synthesize(rng, g, ParameterVector(), nm);
  const double delta = 0.19 * 0.37;
  const ParameterVector shifted_truth(Vector3::Zero(), delta);
  const MeasurementSet shifted =
      resynthesize(g, shifted_truth, nm, base.z, base.z_cp, base.ambiguities);

  auto check_shift = [&](const EstimateReport& a, const EstimateReport& b) {
    CHECK(b.estimate.clock_bias() - a.estimate.clock_bias() == doctest::Approx(delta).epsilon(1e-9));
    CHECK((b.estimate.position() - a.estimate.position()).norm() <= 1e-9);
  };
  check_shift(pr_ls(g, base.pseudo), pr_ls(g, shifted.pseudo));
  check_shift(genie_cp(g, base, nm), genie_cp(g, shifted, nm));
  check_shift(bayes_fixed_point(g, base.pseudo, base.carrier, nm),
              bayes_fixed_point(g, shifted.pseudo, shifted.carrier, nm));
  SolverConfig cfg;
  cfg.n_starts = 10;
  RngStream a(1), b(1);
  check_shift(bayes_multistart(g, base.pseudo, base.carrier, nm, cfg, a),
              bayes_multistart(g, shifted.pseudo, shifted.carrier, nm, cfg, b));
}
