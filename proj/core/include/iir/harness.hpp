#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iir/kernel.hpp"
#include "iir/model.hpp"
#include "iir/stopping.hpp"
#include "iir/synthesis.hpp"
#include "iir/trainer.hpp"

namespace iir {

// ---------------------------------------------------------------------------
// Scenarios and learning curves

/// Train / validation / test triple for one run. Synthetic presets draw three
/// independent samples; file datasets are split by seeded shuffles.
struct Scenario {
  DataSet train;
  DataSet validation;
  DataSet test;
  std::optional<Vector> w_star;  // trig presets only
};

struct ExperimentConfig {
  std::string preset = "trig-d5";
  std::optional<DataSet> data;  // when set, overrides the preset
  std::optional<KernelSpec> kernel;  // empty: primal linear iteration
  bool batch = false;                // gradient descent instead of the cyclic pass
  std::optional<double> gamma;       // empty: 1/kappa of the training set
  StoppingRule rule = StoppingRule::holdout(0.2, 100);
  std::int64_t n = 80;
  std::int64_t epochs = 100;
  std::vector<std::int64_t> n_grid;
  std::int64_t replicates = 1;
  std::uint64_t seed = 0;
  double validation_fraction = 0.2;
  double test_fraction = 0.2;
  std::int64_t test_size = 2000;

  void validate() const;
};

Scenario make_scenario(const ExperimentConfig& config, std::uint64_t seed);

TrainerFactory make_trainer(const ExperimentConfig& config);

struct CurvePoint {
  std::int64_t epoch = 0;
  double train = 0.0;
  double validation = 0.0;
  double test = 0.0;
};

std::vector<CurvePoint> error_curve(const Scenario& scenario, const TrainerFactory& learner,
                                    std::int64_t epochs);
std::vector<CurvePoint> error_curve(const ExperimentConfig& config);

/// Epoch with the smallest test error (first one on ties).
std::int64_t best_test_epoch(std::span<const CurvePoint> curve);

// ---------------------------------------------------------------------------
// Rates

struct RateEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::vector<std::pair<double, double>> points;  // (log n, log error)
};

/// Least-squares line through (log n, log error). Needs >= 3 points.
RateEstimate fit_loglog(std::span<const double> n, std::span<const double> error);

enum class RateMode { norm, risk };

std::string to_string(RateMode mode);
RateMode parse_rate_mode(const std::string& text);

struct RateConfig {
  SpectrumSpec spectrum;
  RateMode mode = RateMode::norm;
  StoppingRule rule = StoppingRule::norm_rule(1.5);
  std::vector<std::int64_t> grid;
  std::int64_t replicates = 50;
  std::optional<double> gamma;  // empty: 1/kappa of the problem
  std::uint64_t seed = 0;
};

/// For each n: mean over replicates of ||w^_{t*(n)} - w_dagger|| (norm mode)
/// or of the excess risk (risk mode), then a log-log fit.
RateEstimate estimate_rate(const RateConfig& config);

// ---------------------------------------------------------------------------
// Bound verification on planted problems

struct BoundCheck {
  std::string name;
  bool applicable = false;
  double max_ratio = 0.0;  // max over t of value / bound
  std::int64_t worst_epoch = 0;
  bool pass = true;
};

struct BoundReport {
  double r = 0.0;
  double gamma = 0.0;
  std::int64_t n = 0;
  std::int64_t epochs = 0;
  std::vector<BoundCheck> checks;
  double closed_form_gap = 0.0;  // max_t ||iterative - spectral closed form|| / (1 + ||w_t||)
  bool pass = true;
};

inline constexpr double kBoundSlack = 1e-8;

/// Runs the population iteration for t = 1..epochs with n inner steps per
/// epoch and evaluates the norm bound, the excess-risk bound (r > 0) and the
/// distance-to-w_dagger bound (r > 1/2).
BoundReport verify_bounds(const SourceProblem& problem, double gamma, std::int64_t epochs,
                          std::int64_t n = 100);

// ---------------------------------------------------------------------------
// Concentration of the empirical operators

struct ConcentrationCheck {
  std::string name;
  double threshold = 0.0;
  double exceedance_frequency = 0.0;
  double max_deviation = 0.0;
  bool pass = true;
};

struct ConcentrationReport {
  std::int64_t n = 0;
  double delta = 0.0;
  std::int64_t trials = 0;
  double kappa = 0.0;
  double M = 0.0;
  double gamma = 0.0;
  std::vector<ConcentrationCheck> checks;
  bool pass = true;
};

/// Resamples datasets of size n and counts how often each deviation exceeds
/// its high-probability threshold:
///   ||T^ - T||_HS                      16 kappa / (3 sqrt n) log(2/delta)
///   ||(1/n) sum x_i y_i - S* g||       16 sqrt(kappa) M / (3 sqrt n) log(2/delta)
///   ||A^ - A||_HS                      32 kappa^2 / (3 sqrt n) log(4/delta)
///   ||b^ - b||                         32 kappa M^2 / (3 sqrt n) log(4/delta)
ConcentrationReport concentration_frequencies(const DiscreteDistribution& dist, std::int64_t n,
                                              double delta, std::int64_t trials,
                                              std::uint64_t seed,
                                              std::optional<double> gamma = std::nullopt);

// ---------------------------------------------------------------------------
// Algebraic identity checks on random instances

struct IdentityCheck {
  std::string name;
  std::int64_t instances = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

/// Random sample with n in [1, max_n], d in [1, max_d], Gaussian entries.
DataSet random_instance(std::mt19937_64& rng, std::int64_t max_n, std::int64_t max_d);

/// Random discrete distribution with up to max_support points in R^d.
DiscreteDistribution random_distribution(std::mt19937_64& rng, std::int64_t max_support,
                                         std::int64_t d);

std::vector<IdentityCheck> run_identity_checks(std::uint64_t seed, std::int64_t instances = 100);

// ---------------------------------------------------------------------------
// Baselines

struct BaselineConfig {
  KernelSpec kernel;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  double validation_fraction = 0.2;
  std::int64_t max_epochs = 200;
  std::vector<double> lambda_grid;  // empty: 10^-9 .. 10^1, one per decade
};

struct BaselineRow {
  std::string dataset;
  Task task = Task::regression;
  double kiir = 0.0;
  double kir = 0.0;
  double krr = 0.0;
  double kiir_epochs = 0.0;  // median selected epoch
  double kir_epochs = 0.0;
  double krr_lambda = 0.0;   // median selected lambda
  std::int64_t runs = 0;
};

using ScenarioSource = std::function<Scenario(std::uint64_t seed)>;

/// Median test error over seeds of hold-out stopped KIIR and KIR and of KRR
/// with lambda picked on the same validation split.
BaselineRow baseline_comparison(const std::string& name, const ScenarioSource& source,
                                const BaselineConfig& config);

double median(std::vector<double> values);

}  // namespace iir
