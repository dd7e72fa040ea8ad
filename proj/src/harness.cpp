#include "satpos/harness.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "satpos/ambiguity.hpp"
#include "satpos/errors.hpp"
#include "satpos/parallel.hpp"
#include "satpos/stats.hpp"

namespace satpos {

namespace {

constexpr int kMaxGeometryAttempts = 100;
constexpr int kDopLargeS = 1000;

/// Draws a well-conditioned geometry, counting singular draws in `resampled`.
Geometry draw_geometry(RngStream& rng, int sat_count, int& resampled) {
  for (int attempt = 0; attempt < kMaxGeometryAttempts; ++attempt) {
    Geometry g = sample_hemisphere(rng, sat_count);
    try {
      NormalSolver check(g);
      return g;
    } catch (const SingularGeometry&) {
      ++resampled;
    }
  }
  throw SingularAbort("no invertible geometry in " + std::to_string(kMaxGeometryAttempts) +
                      " draws for S = " + std::to_string(sat_count));
}

std::vector<int> sat_counts_or(const ExperimentConfig& cfg, std::vector<int> fallback) {
  return cfg.sat_counts.empty() ? fallback : cfg.sat_counts;
}

std::vector<double> ratios_or(const ExperimentConfig& cfg, std::vector<double> fallback) {
  return cfg.ratios.empty() ? fallback : cfg.ratios;
}

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    out[static_cast<std::size_t>(i)] =
        points == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (points - 1);
  }
  return out;
}

MeasurementSet make_measurements(RngStream& rng, const Geometry& g, const ParameterVector& w,
                                 const ExperimentConfig& cfg) {
  std::optional<NoiseOverride> noise;
  if (cfg.zero_noise) {
    noise = NoiseOverride{VectorX::Zero(g.sat_count()), VectorX::Zero(g.sat_count())};
  }
  return synthesize(rng, g, w, cfg.nm, noise);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Table::Cell cell(double x) { return x; }
Table::Cell cell(int x) { return static_cast<long long>(x); }
Table::Cell cell(long x) { return static_cast<long long>(x); }
Table::Cell cell(std::string_view s) { return std::string(s); }

}  // namespace

std::string_view experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Dop:
      return "dop";
    case Experiment::NoisePdf:
      return "noise-pdf";
    case Experiment::HCurve:
      return "hcurve";
    case Experiment::Contour:
      return "contour";
    case Experiment::ErrorCdf:
      return "error-cdf";
    case Experiment::Pcorr:
      return "pcorr";
    case Experiment::FisherCheck:
      return "fisher-check";
    case Experiment::CovarianceCheck:
      return "cov-check";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  nm.validate();
  solver.validate();
  if (trials && *trials < 1) throw InvalidConfig("trials must be >= 1");
  if (threads < 1) throw InvalidConfig("threads must be >= 1");
  if (n_samples < 1) throw InvalidConfig("n_samples must be >= 1");
  for (int s : sat_counts) {
    if (s < 1) throw InvalidConfig("satellite counts must be >= 1");
  }
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidConfig("ratios must be finite and >= 0");
  }
  if (grid && (grid->points < 2 || !(grid->half_width > 0.0))) {
    throw InvalidConfig("grid needs points >= 2 and half_width > 0");
  }
  if (experiment == Experiment::Dop) {
    for (int s : sat_counts) {
      if (s < 4 || s > 10'000) throw InvalidConfig("dop satellite counts must be in [4, 10000]");
    }
  }
  const bool needs_estimation = experiment == Experiment::ErrorCdf ||
                                experiment == Experiment::CovarianceCheck ||
                                experiment == Experiment::Contour;
  if (needs_estimation) {
    for (int s : sat_counts) {
      if (s < 4) throw InvalidConfig("estimation needs at least 4 satellites");
    }
  }
  if (experiment == Experiment::ErrorCdf && !(nm.wavelength > 0.0)) {
    throw InvalidConfig("error-cdf needs wavelength > 0 for ambiguity resolution");
  }
  if (experiment == Experiment::NoisePdf && !(nm.wavelength > 0.0)) {
    throw InvalidConfig("noise-pdf needs wavelength > 0");
  }
}

double error_norm(const Vector4& estimate, const Vector4& truth, ErrorMetric metric) {
  const Vector4 d = estimate - truth;
  return metric == ErrorMetric::Pos3D ? d.head<3>().norm() : d.norm();
}

// --- tables ------------------------------------------------------------

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    os << (c ? "," : "") << t.columns[c];
  }
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              os << format_double(v);
            } else {
              os << v;
            }
          },
          row[c]);
    }
    os << '\n';
  }
}

nlohmann::json to_json(const Table& t) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit([&](const auto& v) { obj[t.columns[c]] = v; }, row[c]);
    }
    out.push_back(std::move(obj));
  }
  return out;
}

// --- dop ---------------------------------------------------------------

std::vector<DopRow> run_dop_experiment(const ExperimentConfig& cfg) {
  const RngStream master(cfg.seed);
  std::vector<DopRow> rows;
  for (int sats : sat_counts_or(cfg, {4, 5, 6, 8, 10, 15, 20, 30, 50, 100, 200, 500, 1000})) {
    const int trials = cfg.trials.value_or(sats <= kDopLargeS ? 10'000 : 100);
    const RngStream per_s = master.substream(static_cast<std::uint64_t>(sats));
    struct Sample {
      double scaled_dop;
      int resampled;
    };
    const auto samples = parallel_map<Sample>(
        static_cast<std::size_t>(trials), cfg.threads, [&](std::size_t t) {
          RngStream rng = per_s.substream(t);
          Sample s{0.0, 0};
          const Geometry g = draw_geometry(rng, sats, s.resampled);
          s.scaled_dop = std::sqrt(static_cast<double>(sats)) * dop(g);
          return s;
        });
    RunningMoments acc;
    DopRow row;
    row.sat_count = sats;
    row.trials = trials;
    for (const auto& s : samples) {
      acc.add(s.scaled_dop);
      row.resampled += s.resampled;
    }
    row.mean_scaled_dop = acc.mean;
    row.std_scaled_dop = acc.stddev();
    rows.push_back(row);
  }
  return rows;
}

Table to_table(const std::vector<DopRow>& rows) {
  Table t{{"sat_count", "trials", "mean_sqrtS_dop", "std_sqrtS_dop", "resampled"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({cell(r.sat_count), cell(r.trials), cell(r.mean_scaled_dop),
                      cell(r.std_scaled_dop), cell(r.resampled)});
  }
  return t;
}

// --- noise-pdf ---------------------------------------------------------

double noise_pdf_normalization(const NoiseModel& nm) {
  const double edge = nm.wavelength * nm.ambiguity_bound + 8.0 * nm.sigma_cp;
  const double step = nm.sigma_cp / 20.0;
  const long n = static_cast<long>(std::ceil(2.0 * edge / step));
  const double h = 2.0 * edge / static_cast<double>(n);
  double sum = 0.5 * (combined_noise_pdf(-edge, nm) + combined_noise_pdf(edge, nm));
  for (long i = 1; i < n; ++i) sum += combined_noise_pdf(-edge + h * static_cast<double>(i), nm);
  return sum * h;
}

int count_noise_pdf_peaks(const NoiseModel& nm) {
  const double edge = nm.wavelength * nm.ambiguity_bound + nm.sigma_cp;
  const double step = nm.sigma_cp / 10.0;
  const long n = static_cast<long>(std::floor(2.0 * edge / step)) + 1;
  std::vector<double> f(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    f[static_cast<std::size_t>(i)] = combined_noise_pdf(-edge + step * static_cast<double>(i), nm);
  }
  int peaks = 0;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    if (f[i] > f[i - 1] && f[i] >= f[i + 1]) ++peaks;
  }
  return peaks;
}

double noise_pdf_flatness(const NoiseModel& nm) {
  const double edge = nm.wavelength * std::max(nm.ambiguity_bound - 1, 0);
  const double step = nm.sigma_cp / 10.0;
  const long n = static_cast<long>(std::floor(2.0 * edge / step)) + 1;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (long i = 0; i < n; ++i) {
    const double f = combined_noise_pdf(-edge + step * static_cast<double>(i), nm);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  return hi / lo;
}

std::vector<NoisePdfCurve> run_noise_pdf(const ExperimentConfig& cfg) {
  std::vector<NoisePdfCurve> out;
  for (double ratio : ratios_or(cfg, {2.0, 4.0, 8.0})) {
    NoiseModel nm = cfg.nm;
    nm.sigma_cp = nm.wavelength / ratio;
    NoisePdfCurve c;
    c.ratio = ratio;
    GridSpec grid;
    if (cfg.grid) {
      grid = *cfg.grid;
    } else {
      grid.half_width = nm.wavelength * nm.ambiguity_bound + 8.0 * nm.sigma_cp;
      grid.points = static_cast<int>(std::ceil(2.0 * grid.half_width / (nm.sigma_cp / 10.0))) + 1;
    }
    c.v = linspace(grid.center - grid.half_width, grid.center + grid.half_width, grid.points);
    c.pdf.reserve(c.v.size());
    for (double v : c.v) c.pdf.push_back(combined_noise_pdf(v, nm));
    c.normalization = noise_pdf_normalization(nm);
    c.peaks = count_noise_pdf_peaks(nm);
    c.flatness = noise_pdf_flatness(nm);
    out.push_back(std::move(c));
  }
  return out;
}

Table to_table(const std::vector<NoisePdfCurve>& curves) {
  Table t{{"ratio", "v", "pdf"}, {}};
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.v.size(); ++i) {
      t.rows.push_back({cell(c.ratio), cell(c.v[i]), cell(c.pdf[i])});
    }
  }
  return t;
}

// --- hcurve / pcorr ----------------------------------------------------

std::vector<HCurvePoint> run_hcurve(const ExperimentConfig& cfg) {
  std::vector<double> fallback;
  for (int i = 0; i <= 40; ++i) fallback.push_back(0.25 * i);
  const RngStream master(cfg.seed);
  std::vector<HCurvePoint> out;
  for (double ratio : ratios_or(cfg, fallback)) {
    // Common draws across ratios keep the curve smooth.
    out.push_back(h_function(ratio, cfg.nm.ambiguity_bound, cfg.n_samples, master, cfg.threads));
  }
  return out;
}

Table to_table(const std::vector<HCurvePoint>& points) {
  Table t{{"ratio", "big_m", "h", "std_err", "n_samples"}, {}};
  for (const auto& p : points) {
    t.rows.push_back(
        {cell(p.ratio), cell(p.big_m), cell(p.h_value), cell(p.std_err), cell(p.n_samples)});
  }
  return t;
}

std::vector<PcorrRow> run_pcorr(const ExperimentConfig& cfg) {
  std::vector<double> fallback;
  for (int i = 0; i <= 20; ++i) fallback.push_back(0.5 * i);
  std::vector<PcorrRow> out;
  for (double ratio : ratios_or(cfg, fallback)) {
    for (int sats : sat_counts_or(cfg, {4, 10, 20, 50, 100, 200, 500, 1000})) {
      out.push_back({ratio, sats, pcorr(ratio, sats)});
    }
  }
  return out;
}

Table to_table(const std::vector<PcorrRow>& rows) {
  Table t{{"ratio", "sat_count", "pcorr"}, {}};
  for (const auto& r : rows) t.rows.push_back({cell(r.ratio), cell(r.sat_count), cell(r.pcorr)});
  return t;
}

// --- contour -----------------------------------------------------------

int count_strict_local_maxima(const Eigen::MatrixXd& values) {
  int count = 0;
  const Eigen::Index rows = values.rows();
  const Eigen::Index cols = values.cols();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      bool strict = true;
      for (Eigen::Index di = -1; di <= 1 && strict; ++di) {
        for (Eigen::Index dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const Eigen::Index a = i + di;
          const Eigen::Index b = j + dj;
          if (a < 0 || b < 0 || a >= rows || b >= cols) continue;
          if (!(values(i, j) > values(a, b))) {
            strict = false;
            break;
          }
        }
      }
      if (strict) ++count;
    }
  }
  return count;
}

namespace {

/// Newton ascent over (w1, w2) with (w3, w4) pinned; gradient fallback.
Eigen::Vector2d polish_2d(const Geometry& g, const MeasurementSet& ms, const NoiseModel& nm,
                          Vector4 w, double& grad_norm) {
  const double fisher = 1.0 / (nm.sigma * nm.sigma) + 1.0 / (nm.sigma_cp * nm.sigma_cp);
  const Eigen::Matrix2d scale = fisher * normal_matrix(g).topLeftCorner<2, 2>();
  for (int it = 0; it < 200; ++it) {
    const LikelihoodEval ev = evaluate_likelihood(g, ms.pseudo, ms.carrier, ParameterVector(w), nm);
    const Eigen::Vector2d grad = ev.gradient.head<2>();
    const Eigen::Matrix2d neg_hess = -ev.hessian.topLeftCorner<2, 2>();
    Eigen::LLT<Eigen::Matrix2d> llt(neg_hess);
    const Eigen::Vector2d dir =
        llt.info() == Eigen::Success ? Eigen::Vector2d(llt.solve(grad)) : Eigen::Vector2d(scale.llt().solve(grad));
    const double slope = grad.dot(dir);
    if (!(slope > 0.0)) break;
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      Vector4 trial = w;
      trial.head<2>() += t * dir;
      if (log_likelihood(g, ms.pseudo, ms.carrier, ParameterVector(trial), nm) >=
          ev.value + 1e-4 * t * slope) {
        w = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted || (t * dir).norm() < 1e-12) break;
  }
  grad_norm = analytic_gradient(g, ms.pseudo, ms.carrier, ParameterVector(w), nm).head<2>().norm();
  return w.head<2>();
}

}  // namespace

ContourResult run_contour(const ExperimentConfig& cfg) {
  const int sats = sat_counts_or(cfg, {50}).front();
  RngStream rng = RngStream(cfg.seed).substream(0);
  int resampled = 0;
  const Geometry g = draw_geometry(rng, sats, resampled);
  const ParameterVector truth;
  const MeasurementSet ms = make_measurements(rng, g, truth, cfg);

  GridSpec grid;
  grid.half_width = 2.0 * cfg.nm.wavelength;
  if (cfg.grid) grid = *cfg.grid;

  ContourResult c;
  c.truth = truth.vec();
  c.w1 = linspace(c.truth[0] + grid.center - grid.half_width,
                  c.truth[0] + grid.center + grid.half_width, grid.points);
  c.w2 = linspace(c.truth[1] + grid.center - grid.half_width,
                  c.truth[1] + grid.center + grid.half_width, grid.points);
  c.log_likelihood.resize(grid.points, grid.points);
  parallel_for(c.w1.size(), cfg.threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < c.w2.size(); ++j) {
      Vector4 w = c.truth;
      w[0] = c.w1[i];
      w[1] = c.w2[j];
      c.log_likelihood(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          log_likelihood(g, ms.pseudo, ms.carrier, ParameterVector(w), cfg.nm);
    }
  });
  c.strict_local_maxima = count_strict_local_maxima(c.log_likelihood);
  Eigen::Index bi = 0, bj = 0;
  c.log_likelihood.maxCoeff(&bi, &bj);
  c.grid_max = {c.w1[static_cast<std::size_t>(bi)], c.w2[static_cast<std::size_t>(bj)]};
  Vector4 start = c.truth;
  start.head<2>() = c.grid_max;
  c.polished_max = polish_2d(g, ms, cfg.nm, start, c.polished_gradient_norm);
  return c;
}

Table to_table(const ContourResult& c) {
  Table t{{"w1", "w2", "log_likelihood"}, {}};
  for (std::size_t i = 0; i < c.w1.size(); ++i) {
    for (std::size_t j = 0; j < c.w2.size(); ++j) {
      t.rows.push_back({cell(c.w1[i]), cell(c.w2[j]),
                        cell(c.log_likelihood(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(j)))});
    }
  }
  return t;
}

// --- error-cdf ---------------------------------------------------------

namespace {

template <typename Fn>
EstimateReport timed(double& ms, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  EstimateReport r = fn();
  ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

ErrorCdfResult run_error_cdf(const ExperimentConfig& cfg) {
  const int sats = sat_counts_or(cfg, {50}).front();
  const int trials = cfg.trials.value_or(2000);
  const RngStream master = RngStream(cfg.seed).substream(static_cast<std::uint64_t>(sats));
  constexpr std::size_t kMethods = std::size(kErrorCdfMethods);

  using TrialRecords = std::array<TrialRecord, kMethods>;
  const auto per_trial = parallel_map<TrialRecords>(
      static_cast<std::size_t>(trials), cfg.threads, [&](std::size_t t) {
        RngStream rng = master.substream(t);
        int resampled = 0;
        const Geometry g = draw_geometry(rng, sats, resampled);
        const ParameterVector truth;
        const MeasurementSet ms = make_measurements(rng, g, truth, cfg);
        TrialRecords recs;
        for (std::size_t k = 0; k < kMethods; ++k) {
          TrialRecord& rec = recs[k];
          rec.trial_id = static_cast<long>(t);
          rec.sat_count = sats;
          rec.method = kErrorCdfMethods[k];
          const EstimateReport rep = timed(rec.wall_time_ms, [&] {
            switch (rec.method) {
              case Method::PseudoRange:
                return pr_ls(g, ms.pseudo);
              case Method::StandardResolution:
                return standard_resolution(g, ms.pseudo, ms.carrier, cfg.nm);
              default:
                return bayes_multistart(g, ms.pseudo, ms.carrier, cfg.nm, cfg.solver, rng);
            }
          });
          rec.error_norm = error_norm(rep.estimate.vec(), truth.vec(), cfg.error_metric);
          rec.log_likelihood = log_likelihood(g, ms.pseudo, ms.carrier, rep.estimate, cfg.nm);
          rec.converged = rep.converged;
        }
        return recs;
      });

  ErrorCdfResult out;
  std::vector<double> pr, std_res, bayes;
  int worse = 0;
  for (const auto& recs : per_trial) {
    for (const auto& r : recs) {
      out.records.push_back(r);
      if (!r.converged) ++out.nonconverged;
    }
    pr.push_back(recs[0].error_norm);
    std_res.push_back(recs[1].error_norm);
    bayes.push_back(recs[2].error_norm);
    if (recs[1].error_norm > recs[0].error_norm) ++worse;
  }
  out.std_worse_than_pr = static_cast<double>(worse) / trials;
  out.median_pr = median(pr);
  out.median_std = median(std_res);
  out.median_bayes = median(bayes);
  out.flagged = 100L * out.nonconverged >= static_cast<long>(out.records.size());
  return out;
}

Table to_table(const ErrorCdfResult& r) {
  Table t{{"method", "sat_count", "rank", "error", "cdf"}, {}};
  for (Method m : kErrorCdfMethods) {
    std::vector<std::pair<double, int>> errs;
    for (const auto& rec : r.records) {
      if (rec.method == m) errs.emplace_back(rec.error_norm, rec.sat_count);
    }
    std::sort(errs.begin(), errs.end());
    const double n = static_cast<double>(errs.size());
    for (std::size_t k = 0; k < errs.size(); ++k) {
      const double level = k + 1 == errs.size() ? 1.0 : static_cast<double>(k + 1) / n;
      t.rows.push_back({cell(method_name(m)), cell(errs[k].second), cell(static_cast<long>(k + 1)),
                        cell(errs[k].first), cell(level)});
    }
  }
  return t;
}

// --- cov-check ---------------------------------------------------------

std::vector<CovarianceRow> run_covariance_check(const ExperimentConfig& cfg) {
  constexpr Method kMethods[] = {Method::PseudoRange, Method::GenieCP, Method::BayesFixedPoint,
                                 Method::BayesMultiStart};
  constexpr std::size_t kCount = std::size(kMethods);
  const int trials = cfg.trials.value_or(2000);
  const RngStream master(cfg.seed);
  const HCurvePoint h = h_function(cfg.nm.ratio(), cfg.nm.ambiguity_bound, cfg.n_samples,
                                   master.substream(0xC0FFEE), cfg.threads);

  std::vector<CovarianceRow> rows;
  for (int sats : sat_counts_or(cfg, {1000})) {
    const RngStream per_s = master.substream(static_cast<std::uint64_t>(sats));
    struct Outcome {
      std::array<Vector4, kCount> scaled_error;
      std::array<bool, kCount> converged;
    };
    const auto outcomes = parallel_map<Outcome>(
        static_cast<std::size_t>(trials), cfg.threads, [&](std::size_t t) {
          RngStream rng = per_s.substream(t);
          int resampled = 0;
          const Geometry g = draw_geometry(rng, sats, resampled);
          const ParameterVector truth;
          const MeasurementSet ms = make_measurements(rng, g, truth, cfg);
          Outcome o;
          for (std::size_t k = 0; k < kCount; ++k) {
            EstimateReport rep;
            switch (kMethods[k]) {
              case Method::PseudoRange:
                rep = pr_ls(g, ms.pseudo);
                break;
              case Method::GenieCP:
                rep = genie_cp(g, ms, cfg.nm);
                break;
              case Method::BayesFixedPoint:
                rep = bayes_fixed_point(g, ms.pseudo, ms.carrier, cfg.nm, cfg.solver);
                break;
              default:
                rep = bayes_multistart(g, ms.pseudo, ms.carrier, cfg.nm, cfg.solver, rng);
                break;
            }
            o.scaled_error[k] = std::sqrt(static_cast<double>(sats)) * (rep.estimate.vec() - truth.vec());
            o.converged[k] = rep.converged;
          }
          return o;
        });

    for (std::size_t k = 0; k < kCount; ++k) {
      CovarianceRow row;
      row.method = kMethods[k];
      row.sat_count = sats;
      Vector4 mean = Vector4::Zero();
      std::vector<Vector4> used;
      for (const auto& o : outcomes) {
        if (!o.converged[k]) {
          ++row.nonconverged;
          continue;
        }
        used.push_back(o.scaled_error[k]);
        mean += o.scaled_error[k];
      }
      row.trials_used = static_cast<int>(used.size());
      row.flagged = 100 * row.nonconverged >= trials;
      mean /= std::max<double>(1.0, static_cast<double>(used.size()));
      row.empirical.setZero();
      for (const auto& e : used) row.empirical += (e - mean) * (e - mean).transpose();
      row.empirical /= std::max<double>(1.0, static_cast<double>(used.size()) - 1.0);
      if (kMethods[k] == Method::BayesFixedPoint || kMethods[k] == Method::BayesMultiStart) {
        row.h_value = h.h_value;
      }
      row.predicted = predicted_covariance(kMethods[k], cfg.nm, row.h_value);
      row.frobenius_rel_dev = (row.empirical - row.predicted).norm() / row.predicted.norm();
      row.max_entry_rel_dev = (row.empirical - row.predicted).cwiseAbs().maxCoeff() /
                              row.predicted.cwiseAbs().maxCoeff();
      rows.push_back(row);
    }
  }
  return rows;
}

Table to_table(const std::vector<CovarianceRow>& rows) {
  Table t{{"method", "sat_count", "trials_used", "nonconverged", "flagged", "h", "frobenius_rel_dev",
           "max_entry_rel_dev"},
          {}};
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) t.columns.push_back("emp_" + std::to_string(i) + std::to_string(j));
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) t.columns.push_back("pred_" + std::to_string(i) + std::to_string(j));
  }
  for (const auto& r : rows) {
    std::vector<Table::Cell> row{cell(method_name(r.method)), cell(r.sat_count),
                                 cell(r.trials_used),        cell(r.nonconverged),
                                 cell(static_cast<long>(r.flagged)),
                                 cell(r.h_value.value_or(std::nan(""))),
                                 cell(r.frobenius_rel_dev),  cell(r.max_entry_rel_dev)};
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) row.push_back(cell(r.empirical(i, j)));
    }
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) row.push_back(cell(r.predicted(i, j)));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

// --- fisher-check ------------------------------------------------------

FisherCheckResult run_fisher_check(const ExperimentConfig& cfg) {
  const RngStream master(cfg.seed);
  const long n = cfg.n_samples;
  const long chunks = (n + kMonteCarloChunk - 1) / kMonteCarloChunk;
  const ParameterVector truth;
  using Acc = std::array<RunningMoments, 3>;
  const auto partial = parallel_map<Acc>(
      static_cast<std::size_t>(chunks), cfg.threads, [&](std::size_t c) {
        RngStream rng = master.substream(c);
        const long begin = static_cast<long>(c) * kMonteCarloChunk;
        const long end = std::min(n, begin + kMonteCarloChunk);
        Acc acc{};
        for (long i = begin; i < end; ++i) {
          const Geometry g = sample_hemisphere(rng, 1);
          const MeasurementSet ms = synthesize(rng, g, truth, cfg.nm);
          const LikelihoodEval ev = evaluate_likelihood(g, ms.pseudo, ms.carrier, truth, cfg.nm);
          const double score = ev.gradient[3];
          const double i_sample = score * score;
          const double j_sample = -ev.hessian(3, 3);
          acc[0].add(i_sample);
          acc[1].add(j_sample);
          acc[2].add(i_sample - j_sample);
        }
        return acc;
      });
  Acc total{};
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < 3; ++k) total[k].merge(p[k]);
  }
  const MonteCarloValue ff = fisher_factor(cfg.nm, n, master.substream(0xF15E), cfg.threads);
  FisherCheckResult r;
  r.i_factor = total[0].mean;
  r.i_std_err = total[0].std_err();
  r.j_factor = total[1].mean;
  r.j_std_err = total[1].std_err();
  r.diff_std_err = total[2].std_err();
  r.fisher_factor = ff.mean;
  r.fisher_std_err = ff.std_err;
  r.draws = total[0].n;
  return r;
}

Table to_table(const FisherCheckResult& r) {
  return Table{{"i_factor", "i_std_err", "j_factor", "j_std_err", "diff_std_err", "fisher_factor",
                "fisher_std_err", "draws"},
               {{cell(r.i_factor), cell(r.i_std_err), cell(r.j_factor), cell(r.j_std_err),
                 cell(r.diff_std_err), cell(r.fisher_factor), cell(r.fisher_std_err),
                 cell(r.draws)}}};
}

// --- dispatch ----------------------------------------------------------

Table run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.experiment) {
    case Experiment::Dop:
      return to_table(run_dop_experiment(cfg));
    case Experiment::NoisePdf:
      return to_table(run_noise_pdf(cfg));
    case Experiment::HCurve:
      return to_table(run_hcurve(cfg));
    case Experiment::Contour:
      return to_table(run_contour(cfg));
    case Experiment::ErrorCdf:
      return to_table(run_error_cdf(cfg));
    case Experiment::Pcorr:
      return to_table(run_pcorr(cfg));
    case Experiment::FisherCheck:
      return to_table(run_fisher_check(cfg));
    case Experiment::CovarianceCheck:
      return to_table(run_covariance_check(cfg));
  }
  throw InvalidConfig("unknown experiment");
}

}  // namespace satpos
