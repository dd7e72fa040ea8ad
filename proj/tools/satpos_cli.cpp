// satpos: command-line driver for the large-constellation positioning experiments.
//
//   satpos dop --sats 20 --sats 10000 --trials 100
//   satpos error-cdf --ratio 4 --sats 50 --out cdf.csv
//
// Exit codes: 0 success, 2 invalid configuration, 3 singular geometry abort.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "satpos/errors.hpp"
#include "satpos/harness.hpp"

namespace {

constexpr int kExitInvalidConfig = 2;
constexpr int kExitSingular = 3;

struct Flags {
  std::vector<int> sats;
  double sigma = 1.0;
  double lambda = 0.19;
  std::vector<double> ratio;
  std::optional<double> sigma_cp;
  std::optional<int> big_m;
  std::optional<int> trials;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  int threads = 1;
  std::optional<int> starts;
  std::string error_metric = "pos3d";
  std::optional<long> samples;
  std::optional<int> grid_points;
  std::optional<double> half_width;
};

void add_shared_flags(CLI::App& app, Flags& f) {
  app.add_option("--sats", f.sats, "Satellite count(s); repeat for a sweep");
  app.add_option("--sigma", f.sigma, "Pseudo-range noise std [m]")->capture_default_str();
  app.add_option("--lambda", f.lambda, "Carrier wavelength [m]")->capture_default_str();
  auto* ratio = app.add_option("--ratio", f.ratio, "lambda / sigma_cp; repeat for a sweep");
  auto* sigma_cp = app.add_option("--sigma-cp", f.sigma_cp, "Carrier noise std [m]");
  ratio->excludes(sigma_cp);
  app.add_option("--big-m", f.big_m, "Ambiguity bound M");
  app.add_option("--trials", f.trials, "Monte Carlo trials");
  app.add_option("--seed", f.seed, "Master seed")->capture_default_str();
  app.add_option("--out", f.out, "Output path (default stdout)");
  app.add_option("--format", f.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--starts", f.starts, "Multi-start count");
  app.add_option("--error-metric", f.error_metric, "Error norm")
      ->check(CLI::IsMember({"pos3d", "posclock"}))
      ->capture_default_str();
  app.add_option("--samples", f.samples, "Monte Carlo samples (hcurve, fisher-check, cov-check h)");
  app.add_option("--grid-points", f.grid_points, "Grid nodes per axis (contour, noise-pdf)");
  app.add_option("--half-width", f.half_width, "Grid half width [m] (contour, noise-pdf)");
}

satpos::ExperimentConfig build_config(satpos::Experiment exp, const Flags& f) {
  using satpos::Experiment;
  satpos::ExperimentConfig cfg;
  cfg.experiment = exp;
  cfg.sat_counts = f.sats;
  cfg.trials = f.trials;
  cfg.seed = f.seed;
  cfg.threads = f.threads;
  cfg.output_path = f.out;
  cfg.error_metric =
      f.error_metric == "pos3d" ? satpos::ErrorMetric::Pos3D : satpos::ErrorMetric::PosClock4D;

  const bool sweep = exp == Experiment::NoisePdf || exp == Experiment::HCurve ||
                     exp == Experiment::Pcorr;
  if (sweep) cfg.ratios = f.ratio;
  const double default_ratio = exp == Experiment::CovarianceCheck ? 8.0 : 4.0;
  const int default_m = exp == Experiment::NoisePdf ? 3 : 20;

  cfg.nm.sigma = f.sigma;
  cfg.nm.wavelength = f.lambda;
  cfg.nm.ambiguity_bound = f.big_m.value_or(default_m);
  if (f.sigma_cp) {
    cfg.nm.sigma_cp = *f.sigma_cp;
  } else {
    const double ratio = f.ratio.empty() ? default_ratio : f.ratio.front();
    if (!(ratio > 0.0)) throw satpos::InvalidConfig("--ratio must be > 0");
    cfg.nm.sigma_cp = f.lambda / ratio;
  }
  if (f.starts) cfg.solver.n_starts = *f.starts;
  if (f.samples) cfg.n_samples = *f.samples;
  if (f.grid_points || f.half_width) {
    satpos::GridSpec grid;
    grid.half_width = exp == Experiment::Contour ? 2.0 * f.lambda
                                                 : f.lambda * cfg.nm.ambiguity_bound +
                                                       8.0 * cfg.nm.sigma_cp;
    if (f.grid_points) grid.points = *f.grid_points;
    if (f.half_width) grid.half_width = *f.half_width;
    cfg.grid = grid;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-constellation GNSS positioning experiments"};
  app.require_subcommand(1);
  Flags flags;

  const std::map<std::string, satpos::Experiment> commands{
      {"dop", satpos::Experiment::Dop},
      {"noise-pdf", satpos::Experiment::NoisePdf},
      {"hcurve", satpos::Experiment::HCurve},
      {"contour", satpos::Experiment::Contour},
      {"error-cdf", satpos::Experiment::ErrorCdf},
      {"pcorr", satpos::Experiment::Pcorr},
      {"fisher-check", satpos::Experiment::FisherCheck},
      {"cov-check", satpos::Experiment::CovarianceCheck},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, exp] : commands) {
    auto* sub = app.add_subcommand(name, std::string(satpos::experiment_name(exp)) + " experiment");
    add_shared_flags(*sub, flags);
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidConfig;
  }

  try {
    satpos::Experiment exp{};
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) exp = commands.at(name);
    }
    const satpos::ExperimentConfig cfg = build_config(exp, flags);
    const satpos::Table table = satpos::run_experiment(cfg);

    std::ofstream file;
    if (!cfg.output_path.empty()) {
      file.open(cfg.output_path);
      if (!file) {
        std::cerr << "cannot open " << cfg.output_path << "\n";
        return kExitInvalidConfig;
      }
    }
    std::ostream& os = cfg.output_path.empty() ? std::cout : file;
    if (flags.format == "json") {
      os << satpos::to_json(table).dump(2) << '\n';
    } else {
      satpos::write_csv(os, table);
    }
  } catch (const satpos::InvalidConfig& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const satpos::SingularAbort& e) {
    std::cerr << "singular geometry: " << e.what() << "\n";
    return kExitSingular;
  } catch (const satpos::SingularGeometry& e) {
    std::cerr << "singular geometry: " << e.what() << "\n";
    return kExitSingular;
  }
  return 0;
}
