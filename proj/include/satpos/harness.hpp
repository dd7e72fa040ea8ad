#ifndef SATPOS_HARNESS_HPP
#define SATPOS_HARNESS_HPP

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "satpos/asymptotics.hpp"
#include "satpos/estimators.hpp"
#include "satpos/measurement.hpp"

namespace satpos {

enum class Experiment { Dop, NoisePdf, HCurve, Contour, ErrorCdf, Pcorr, FisherCheck, CovarianceCheck };
enum class ErrorMetric { Pos3D, PosClock4D };

/// Regular grid: `points` nodes over [center - half_width, center + half_width].
struct GridSpec {
  double center = 0.0;
  double half_width = 1.0;
  int points = 201;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Dop;
  NoiseModel nm;
  std::vector<int> sat_counts;
  std::optional<int> trials;  // unset: per-experiment default
  std::uint64_t seed = 1;
  SolverConfig solver;
  ErrorMetric error_metric = ErrorMetric::Pos3D;
  std::string output_path;
  std::optional<GridSpec> grid;
  std::vector<double> ratios;  // noise-pdf, hcurve, pcorr sweeps
  long n_samples = 1'000'000;  // hcurve, fisher-check
  int threads = 1;
  bool zero_noise = false;  // test hook: z = z~ = 0

  void validate() const;
};

/// Thrown when 100 consecutive geometry draws were all singular.
class SingularAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Column-typed result table; the unit of CSV / JSON emission.
struct Table {
  using Cell = std::variant<double, long long, std::string>;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Header row, '.' decimals, 17 significant digits.
void write_csv(std::ostream& os, const Table& t);
/// Array of one object per row, same fields as the CSV.
nlohmann::json to_json(const Table& t);

struct TrialRecord {
  long trial_id = 0;
  int sat_count = 0;
  Method method = Method::PseudoRange;
  double error_norm = 0.0;  // [m]
  double log_likelihood = 0.0;
  bool converged = true;
  double wall_time_ms = 0.0;  // diagnostics only; never emitted
};

// --- dop ---------------------------------------------------------------

struct DopRow {
  int sat_count = 0;
  int trials = 0;
  double mean_scaled_dop = 0.0;  // mean of sqrt(S) * DOP
  double std_scaled_dop = 0.0;
  int resampled = 0;             // singular draws replaced
};

std::vector<DopRow> run_dop_experiment(const ExperimentConfig& cfg);
Table to_table(const std::vector<DopRow>& rows);

// --- noise-pdf ---------------------------------------------------------

struct NoisePdfCurve {
  double ratio = 0.0;
  std::vector<double> v;
  std::vector<double> pdf;
  double normalization = 0.0;  // trapezoid integral over [-lambda M - 8 sigma_cp, lambda M + 8 sigma_cp]
  int peaks = 0;               // local maxima on [-lambda M - sigma_cp, lambda M + sigma_cp]
  double flatness = 0.0;       // max / min on [-lambda (M-1), lambda (M-1)]
};

std::vector<NoisePdfCurve> run_noise_pdf(const ExperimentConfig& cfg);
Table to_table(const std::vector<NoisePdfCurve>& curves);

/// Helpers shared with tests: peak count at resolution sigma_cp / 10 and
/// max/min ratio, both for the combined noise density of `nm`.
int count_noise_pdf_peaks(const NoiseModel& nm);
double noise_pdf_flatness(const NoiseModel& nm);
double noise_pdf_normalization(const NoiseModel& nm);

// --- hcurve / pcorr ----------------------------------------------------

std::vector<HCurvePoint> run_hcurve(const ExperimentConfig& cfg);
Table to_table(const std::vector<HCurvePoint>& points);

struct PcorrRow {
  double ratio = 0.0;
  int sat_count = 0;
  double pcorr = 0.0;
};

std::vector<PcorrRow> run_pcorr(const ExperimentConfig& cfg);
Table to_table(const std::vector<PcorrRow>& rows);

// --- contour -----------------------------------------------------------

struct ContourResult {
  Vector4 truth;
  std::vector<double> w1;
  std::vector<double> w2;
  Eigen::MatrixXd log_likelihood;  // (i, j) at (w1[i], w2[j])
  int strict_local_maxima = 0;
  Eigen::Vector2d grid_max;
  Eigen::Vector2d polished_max;          // 2-D ascent from grid_max
  double polished_gradient_norm = 0.0;   // |(dL/dw1, dL/dw2)| there
};

ContourResult run_contour(const ExperimentConfig& cfg);
Table to_table(const ContourResult& c);

/// Grid nodes strictly greater than every existing 8-neighbour.
int count_strict_local_maxima(const Eigen::MatrixXd& values);

// --- error-cdf ---------------------------------------------------------

struct ErrorCdfResult {
  std::vector<TrialRecord> records;  // trial-major, methods in kErrorCdfMethods order
  double std_worse_than_pr = 0.0;    // fraction of trials
  double median_pr = 0.0;
  double median_std = 0.0;
  double median_bayes = 0.0;
  int nonconverged = 0;
  bool flagged = false;  // nonconverged share of estimates >= 1%
};

inline constexpr Method kErrorCdfMethods[] = {Method::PseudoRange, Method::StandardResolution,
                                              Method::BayesMultiStart};

ErrorCdfResult run_error_cdf(const ExperimentConfig& cfg);
/// Sorted errors with CDF levels k/n per method.
Table to_table(const ErrorCdfResult& r);

// --- cov-check ---------------------------------------------------------

struct CovarianceRow {
  Method method = Method::PseudoRange;
  int sat_count = 0;
  int trials_used = 0;
  int nonconverged = 0;
  bool flagged = false;  // nonconverged share of trials >= 1%
  Matrix4 empirical;
  Matrix4 predicted;
  double frobenius_rel_dev = 0.0;
  double max_entry_rel_dev = 0.0;  // relative to the largest predicted entry
  std::optional<double> h_value;
};

std::vector<CovarianceRow> run_covariance_check(const ExperimentConfig& cfg);
Table to_table(const std::vector<CovarianceRow>& rows);

// --- fisher-check ------------------------------------------------------

struct FisherCheckResult {
  double i_factor = 0.0;  // E[(dl/db)^2]
  double i_std_err = 0.0;
  double j_factor = 0.0;  // E[-d^2 l/db^2]
  double j_std_err = 0.0;
  double diff_std_err = 0.0;  // paired std-err of I - J
  double fisher_factor = 0.0;
  double fisher_std_err = 0.0;
  long draws = 0;
};

/// Single-satellite draws scored at the truth; the clock-bias entry of the
/// design row is 1, so its score and curvature are the scalar factors.
FisherCheckResult run_fisher_check(const ExperimentConfig& cfg);
Table to_table(const FisherCheckResult& r);

// --- shared ------------------------------------------------------------

std::string_view experiment_name(Experiment e);
double error_norm(const Vector4& estimate, const Vector4& truth, ErrorMetric metric);

/// Runs the configured experiment and returns its table.
Table run_experiment(const ExperimentConfig& cfg);

}  // namespace satpos

#endif  // SATPOS_HARNESS_HPP
