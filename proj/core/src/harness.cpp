#include "iir/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iir/error.hpp"
#include "iir/linalg.hpp"
#include "iir/linear.hpp"

namespace iir {

namespace {

// Stream indices for the independent samples of a synthetic scenario.
enum : std::uint64_t { kStreamWeights = 0, kStreamTrain = 1, kStreamValidation = 2, kStreamTest = 3 };

double relative_gap(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, std::max(a.norm(), b.norm()));
}

Eigen::Index scaled_count(std::int64_t n, double fraction) {
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(fraction * n)));
}

double ratio(double value, double bound) {
  if (bound > 0.0) return value / bound;
  return value > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

void record(BoundCheck& check, double value, double bound, std::int64_t t) {
  const double q = ratio(value, bound);
  if (q > check.max_ratio) {
    check.max_ratio = q;
    check.worst_epoch = t;
  }
}

Scenario split_dataset(const DataSet& data, double validation_fraction, double test_fraction,
                       std::uint64_t seed) {
  const auto outer = split_holdout(data, test_fraction, stream_seed(seed, kStreamTest));
  auto inner = split_holdout(outer.train, validation_fraction, stream_seed(seed, kStreamValidation));
  return {std::move(inner.train), std::move(inner.validation), outer.validation, std::nullopt};
}

}  // namespace

void ExperimentConfig::validate() const {
  detail::require(n >= 1, "config: n must be >= 1");
  detail::require(epochs >= 0, "config: epochs must be >= 0");
  detail::require(replicates >= 1, "config: replicates must be >= 1");
  detail::require(test_size >= 1, "config: test size must be >= 1");
  detail::require(validation_fraction > 0.0 && validation_fraction < 1.0,
                  "config: validation fraction must lie in (0, 1)");
  detail::require(test_fraction > 0.0 && test_fraction < 1.0,
                  "config: test fraction must lie in (0, 1)");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    detail::require(n_grid[i] > n_grid[i - 1], "config: n grid must be increasing");
  }
  if (kernel) kernel->validate();
  if (gamma) detail::require(*gamma > 0.0, "config: gamma must be positive");
}

Scenario make_scenario(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  if (config.data) {
    return split_dataset(*config.data, config.validation_fraction, config.test_fraction, seed);
  }
  const auto preset = Preset::parse(config.preset);
  const auto n_val = scaled_count(config.n, config.validation_fraction);
  if (preset.kind == Preset::Kind::trig) {
    const auto problem = TrigProblem::with_random_weights(preset.d,
                                                          stream_seed(seed, kStreamWeights),
                                                          preset.noise_sd);
    return {sample_trig(problem, config.n, stream_seed(seed, kStreamTrain)),
            sample_trig(problem, n_val, stream_seed(seed, kStreamValidation)),
            sample_trig(problem, config.test_size, stream_seed(seed, kStreamTest)),
            problem.w_star};
  }
  const auto problem = make_source_problem(preset.spectrum(), stream_seed(seed, kStreamWeights));
  std::mt19937_64 train_rng(stream_seed(seed, kStreamTrain));
  std::mt19937_64 val_rng(stream_seed(seed, kStreamValidation));
  std::mt19937_64 test_rng(stream_seed(seed, kStreamTest));
  return {problem.distribution.sample(config.n, train_rng),
          problem.distribution.sample(n_val, val_rng),
          problem.distribution.sample(config.test_size, test_rng), problem.w_dagger};
}

TrainerFactory make_trainer(const ExperimentConfig& config) {
  if (config.kernel) {
    return kernel_trainer(*config.kernel,
                          config.batch ? KernelMethod::batch : KernelMethod::incremental,
                          config.gamma);
  }
  return linear_trainer(config.batch ? LinearMethod::batch : LinearMethod::incremental,
                        config.gamma);
}

std::vector<CurvePoint> error_curve(const Scenario& scenario, const TrainerFactory& learner,
                                    std::int64_t epochs) {
  detail::require(epochs >= 0, "error_curve: epochs must be >= 0");
  const Task task = scenario.train.task();
  auto trainer = learner(scenario.train);
  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(epochs));
  for (std::int64_t t = 1; t <= epochs; ++t) {
    trainer->advance();
    curve.push_back(
        {t,
         prediction_error(trainer->predict(scenario.train.inputs()), scenario.train.outputs(), task),
         prediction_error(trainer->predict(scenario.validation.inputs()),
                          scenario.validation.outputs(), task),
         prediction_error(trainer->predict(scenario.test.inputs()), scenario.test.outputs(),
                          task)});
  }
  return curve;
}

std::vector<CurvePoint> error_curve(const ExperimentConfig& config) {
  return error_curve(make_scenario(config, config.seed), make_trainer(config), config.epochs);
}

std::int64_t best_test_epoch(std::span<const CurvePoint> curve) {
  std::vector<double> test(curve.size());
  std::transform(curve.begin(), curve.end(), test.begin(),
                 [](const CurvePoint& p) { return p.test; });
  return curve[static_cast<std::size_t>(first_argmin(test) - 1)].epoch;
}

RateEstimate fit_loglog(std::span<const double> n, std::span<const double> error) {
  detail::require(n.size() == error.size(), "fit_loglog: length mismatch");
  detail::require(n.size() >= 3, "fit_loglog: need at least 3 points for a slope");
  RateEstimate est;
  const auto m = static_cast<double>(n.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    detail::require(n[i] > 0.0 && error[i] > 0.0, "fit_loglog: values must be positive");
    est.points.emplace_back(std::log(n[i]), std::log(error[i]));
    mx += est.points.back().first;
    my += est.points.back().second;
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [lx, ly] : est.points) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
  }
  detail::require(sxx > 0.0, "fit_loglog: n values must not all coincide");
  est.slope = sxy / sxx;
  est.intercept = my - est.slope * mx;
  double sse = 0.0;
  for (const auto& [lx, ly] : est.points) {
    const double res = ly - (est.intercept + est.slope * lx);
    sse += res * res;
  }
  est.stderr_slope = std::sqrt(sse / (m - 2.0) / sxx);
  return est;
}

std::string to_string(RateMode mode) { return mode == RateMode::norm ? "norm" : "risk"; }

RateMode parse_rate_mode(const std::string& text) {
  if (text == "norm") return RateMode::norm;
  if (text == "risk") return RateMode::risk;
  throw ContractViolation("unknown rate mode '" + text + "' (expected norm or risk)");
}

RateEstimate estimate_rate(const RateConfig& config) {
  detail::require(config.grid.size() >= 3, "estimate_rate: grid needs at least 3 sizes");
  for (std::size_t i = 1; i < config.grid.size(); ++i) {
    detail::require(config.grid[i] > config.grid[i - 1], "estimate_rate: grid must increase");
  }
  detail::require(config.grid.front() >= 1, "estimate_rate: sizes must be >= 1");
  detail::require(std::log10(static_cast<double>(config.grid.back()) /
                             static_cast<double>(config.grid.front())) >= 1.5 - 1e-12,
                  "estimate_rate: grid must span at least 1.5 decades");
  detail::require(config.replicates >= 1, "estimate_rate: replicates must be >= 1");
  detail::require(config.rule.a_priori(), "estimate_rate: needs an a priori stopping rule");

  const auto problem = make_source_problem(config.spectrum, stream_seed(config.seed, 0));
  if (config.mode == RateMode::norm) {
    detail::require(problem.w_dagger.has_value(), "estimate_rate: norm mode needs r >= 1/2");
  }
  const double gamma = config.gamma.value_or(1.0 / problem.kappa);

  const auto reps = static_cast<std::size_t>(config.replicates);
  const std::size_t jobs = config.grid.size() * reps;
  std::vector<double> errors(jobs);
  parallel_for(jobs, [&](std::size_t job) {
    const auto n = config.grid[job / reps];
    std::mt19937_64 rng(stream_seed(config.seed, 1 + job));
    const auto data = problem.distribution.sample(n, rng);
    const auto t = stopping_time(config.rule, n);
    // gamma is checked against the problem's kappa, which bounds every sample.
    check_step_size(gamma, problem.kappa, n, StepRange::theorem);
    IterState state{Vector::Zero(data.d()), 0, gamma};
    for (std::int64_t e = 0; e < t; ++e) state = epoch_update(state, data);
    errors[job] = config.mode == RateMode::norm
                      ? (state.w - *problem.w_dagger).norm()
                      : population_excess_risk(state.w, problem.distribution);
  });

  std::vector<double> ns;
  std::vector<double> means;
  for (std::size_t g = 0; g < config.grid.size(); ++g) {
    double sum = 0.0;
    for (std::size_t k = 0; k < reps; ++k) sum += errors[g * reps + k];
    ns.push_back(static_cast<double>(config.grid[g]));
    means.push_back(sum / static_cast<double>(reps));
  }
  return fit_loglog(ns, means);
}

BoundReport verify_bounds(const SourceProblem& problem, double gamma, std::int64_t epochs,
                          std::int64_t n) {
  detail::require(epochs >= 1, "verify_bounds: epochs must be >= 1");
  const auto closed_form = exact_population_trajectory(problem, gamma, n, epochs);
  const auto ops = population_operators(problem.distribution);
  const double r = problem.r;
  const double kappa = problem.kappa;
  const double g = problem.g_norm;

  BoundReport report;
  report.r = r;
  report.gamma = gamma;
  report.n = n;
  report.epochs = epochs;
  BoundCheck norm{"iterate_norm", true};
  BoundCheck risk{"approximation_risk", r > 0.0};
  BoundCheck distance{"approximation_distance", r > 0.5 && problem.w_dagger.has_value()};

  IterState state{Vector::Zero(ops.T.rows()), 0, gamma};
  for (std::int64_t t = 1; t <= epochs; ++t) {
    state = population_epoch_update(state, ops, n);
    const double gt = gamma * static_cast<double>(t);
    const Vector& w = state.w;

    report.closed_form_gap = std::max(
        report.closed_form_gap,
        (w - closed_form[static_cast<std::size_t>(t)]).norm() / (1.0 + w.norm()));

    const double norm_bound = r < 0.5 ? std::max(std::pow(kappa, r - 0.5), std::pow(gt, 0.5 - r)) * g
                                      : std::pow(kappa, r - 0.5) * g;
    record(norm, w.norm(), norm_bound, t);
    if (risk.applicable) {
      record(risk, population_excess_risk(w, problem.distribution),
             std::pow(r / gt, 2.0 * r) * g * g, t);
    }
    if (distance.applicable) {
      record(distance, (w - *problem.w_dagger).norm(), std::pow((r - 0.5) / gt, r - 0.5) * g, t);
    }
  }

  for (auto* check : {&norm, &risk, &distance}) {
    check->pass = !check->applicable || check->max_ratio <= 1.0 + kBoundSlack;
    report.pass = report.pass && check->pass;
    report.checks.push_back(*check);
  }
  report.pass = report.pass && report.closed_form_gap <= 1e-10;
  return report;
}

ConcentrationReport concentration_frequencies(const DiscreteDistribution& dist, std::int64_t n,
                                              double delta, std::int64_t trials,
                                              std::uint64_t seed, std::optional<double> gamma) {
  detail::require(trials >= 100, "concentration_frequencies: need at least 100 trials");
  detail::require(n >= 1, "concentration_frequencies: n must be >= 1");
  detail::require(delta > 0.0 && delta < 1.0, "concentration_frequencies: delta must lie in (0, 1)");

  ConcentrationReport report;
  report.n = n;
  report.delta = delta;
  report.trials = trials;
  report.kappa = dist.kappa();
  report.M = dist.output_bound();
  report.gamma = gamma.value_or(1.0 / report.kappa);

  const auto ops = population_operators(dist);
  const auto population = population_epoch_terms(ops, report.gamma, n);
  const double root_n = std::sqrt(static_cast<double>(n));
  const double kappa = report.kappa;
  const double M = report.M;
  report.checks = {
      {"covariance_hs", 16.0 * kappa / (3.0 * root_n) * std::log(2.0 / delta)},
      {"cross_moment", 16.0 * std::sqrt(kappa) * M / (3.0 * root_n) * std::log(2.0 / delta)},
      {"A_hs", 32.0 * kappa * kappa / (3.0 * root_n) * std::log(4.0 / delta)},
      {"b_norm", 32.0 * kappa * M * M / (3.0 * root_n) * std::log(4.0 / delta)},
  };

  const auto count = static_cast<std::size_t>(trials);
  std::vector<std::array<double, 4>> deviations(count);
  parallel_for(count, [&](std::size_t trial) {
    std::mt19937_64 rng(stream_seed(seed, trial));
    const auto data = dist.sample(n, rng);
    const auto map = build_epoch_map(data, report.gamma);
    const Vector cross = data.inputs().transpose() * data.outputs() / static_cast<double>(n);
    deviations[trial] = {(map.T_hat - ops.T).norm(), (cross - ops.h).norm(),
                         (map.A_hat - population.A).norm(), (map.b_hat - population.b).norm()};
  });

  for (std::size_t c = 0; c < report.checks.size(); ++c) {
    auto& check = report.checks[c];
    std::int64_t exceed = 0;
    for (const auto& dev : deviations) {
      check.max_deviation = std::max(check.max_deviation, dev[c]);
      if (dev[c] > check.threshold) ++exceed;
    }
    check.exceedance_frequency = static_cast<double>(exceed) / static_cast<double>(trials);
    check.pass = check.exceedance_frequency <= delta;
    report.pass = report.pass && check.pass;
  }
  return report;
}

DataSet random_instance(std::mt19937_64& rng, std::int64_t max_n, std::int64_t max_d) {
  std::uniform_int_distribution<std::int64_t> pick_n(1, max_n);
  std::uniform_int_distribution<std::int64_t> pick_d(1, max_d);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = pick_n(rng);
  const auto d = pick_d(rng);
  Matrix x(n, d);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = normal(rng);
    y(i) = normal(rng);
  }
  return DataSet(std::move(x), std::move(y));
}

DiscreteDistribution random_distribution(std::mt19937_64& rng, std::int64_t max_support,
                                         std::int64_t d) {
  std::uniform_int_distribution<std::int64_t> pick_m(1, max_support);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto m = pick_m(rng);
  Matrix support(m, d);
  Vector weights(m);
  Vector values(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) support(j, k) = normal(rng);
    weights(j) = uniform(rng) + 0.05;
    values(j) = normal(rng);
  }
  weights /= weights.sum();
  return DiscreteDistribution(std::move(support), std::move(weights), std::move(values), 0.0);
}

std::vector<IdentityCheck> run_identity_checks(std::uint64_t seed, std::int64_t instances) {
  detail::require(instances >= 1, "run_identity_checks: need at least one instance");
  IdentityCheck map_check{"epoch_map_equals_epoch_update", instances, 0.0, 1e-10};
  IdentityCheck product_check{"contraction_equals_cyclic_product", instances, 0.0, 1e-10};
  IdentityCheck norm_check{"contraction_norm_at_most_one", instances, 0.0, 1e-12};
  IdentityCheck gd_check{"population_epoch_equals_n_gd_steps", instances, 0.0, 1e-12};
  IdentityCheck prod_check{"product_expansion", instances, 0.0, 1e-10};
  IdentityCheck sum_check{"sum_expansion", instances, 0.0, 1e-10};

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick_len(1, 8);
  for (std::int64_t k = 0; k < instances; ++k) {
    // Empirical epoch map against the inner loop.
    const auto data = random_instance(rng, 50, 10);
    const double gamma = default_step_size(data);
    const auto map = build_epoch_map(data, gamma);
    Vector w(data.d());
    for (auto& v : w) v = normal(rng);
    const auto direct = epoch_update({w, 0, gamma}, data).w;
    map_check.max_error =
        std::max(map_check.max_error, (map.apply(w) - direct).norm() / (1.0 + w.norm()));
    product_check.max_error = std::max(
        product_check.max_error, relative_gap(map.contraction, cyclic_product(data, gamma)));
    // Reported as the excess of the spectral norm over 1.
    norm_check.max_error =
        std::max(norm_check.max_error, spectral_norm(map.contraction) - 1.0);

    // Population epoch against n explicit gradient steps on the support.
    const auto d = data.d();
    const auto dist = random_distribution(rng, 20, d);
    const auto n = data.n();
    const double pop_gamma = 1.0 / dist.kappa();
    Vector v(d);
    for (auto& c : v) c = normal(rng);
    const auto via_operators = population_epoch_update({v, 0, pop_gamma}, dist, n).w;
    Vector explicit_gd = v;
    const double eta = pop_gamma / static_cast<double>(n);
    for (Eigen::Index step = 0; step < n; ++step) {
      Vector grad = Vector::Zero(d);
      for (Eigen::Index j = 0; j < dist.support_size(); ++j) {
        const auto x = dist.support().row(j);
        grad += dist.weights()(j) * (x.dot(explicit_gd) - dist.regression_values()(j)) *
                x.transpose();
      }
      explicit_gd -= eta * grad;
    }
    gd_check.max_error = std::max(gd_check.max_error, (via_operators - explicit_gd).norm() /
                                                          (1.0 + explicit_gd.norm()));

    // Product and sum expansions on generic (non-symmetric) 5x5 operators.
    const int len = pick_len(rng);
    std::vector<Matrix> ops;
    std::vector<Vector> vecs;
    for (int i = 0; i < len; ++i) {
      Matrix t(5, 5);
      for (auto& c : t.reshaped()) c = 0.3 * normal(rng);
      ops.push_back(std::move(t));
      Vector u(5);
      for (auto& c : u) c = normal(rng);
      vecs.push_back(std::move(u));
    }
    const auto pd = product_decomposition_check(ops);
    prod_check.max_error = std::max(prod_check.max_error, relative_gap(pd.lhs, pd.rhs));
    const auto sd = sum_decomposition_check(ops, vecs);
    sum_check.max_error = std::max(sum_check.max_error, relative_gap(sd.lhs, sd.rhs));
  }

  std::vector<IdentityCheck> out{map_check, product_check, norm_check,
                                 gd_check,  prod_check,    sum_check};
  for (auto& c : out) c.pass = c.max_error <= c.tolerance;
  return out;
}

double median(std::vector<double> values) {
  detail::require(!values.empty(), "median: empty input");
  std::sort(values.begin(), values.end());
  const auto m = values.size();
  return m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

BaselineRow baseline_comparison(const std::string& name, const ScenarioSource& source,
                                const BaselineConfig& config) {
  detail::require(!config.seeds.empty(), "baseline_comparison: need at least one seed");
  detail::require(config.max_epochs >= 1, "baseline_comparison: max_epochs must be >= 1");
  config.kernel.validate();
  std::vector<double> grid = config.lambda_grid;
  if (grid.empty()) {
    for (int e = 1; e >= -9; --e) grid.push_back(std::pow(10.0, e));
  }

  struct Run {
    double kiir, kir, krr, kiir_t, kir_t, lambda;
    Task task;
  };
  std::vector<Run> runs(config.seeds.size());
  parallel_for(runs.size(), [&](std::size_t s) {
    const auto scenario = source(config.seeds[s]);
    const Task task = scenario.train.task();
    const auto& val = scenario.validation;
    const auto& test = scenario.test;
    auto gram = std::make_shared<const Matrix>(gram_matrix(config.kernel, scenario.train.inputs()));
    const double gamma = DualState::default_step_size(*gram);
    const Matrix val_cross = cross_gram(config.kernel, val.inputs(), scenario.train.inputs());
    const Matrix test_cross = cross_gram(config.kernel, test.inputs(), scenario.train.inputs());

    auto early_stopped = [&](auto epoch_fn, double& selected) {
      DualState state = DualState::zero(gram, gamma);
      std::vector<double> val_err;
      std::vector<Vector> alphas;
      for (std::int64_t t = 1; t <= config.max_epochs; ++t) {
        state = epoch_fn(state, scenario.train.outputs());
        val_err.push_back(prediction_error(val_cross * state.alpha, val.outputs(), task));
        alphas.push_back(state.alpha);
      }
      const auto best = first_argmin(val_err);
      selected = static_cast<double>(best);
      return prediction_error(test_cross * alphas[static_cast<std::size_t>(best - 1)],
                              test.outputs(), task);
    };

    Run run{};
    run.task = task;
    run.kiir = early_stopped(kiir_epoch, run.kiir_t);
    run.kir = early_stopped(kir_epoch, run.kir_t);

    std::vector<double> val_err;
    std::vector<Vector> alphas;
    for (double lambda : grid) {
      alphas.push_back(krr_fit(*gram, scenario.train.outputs(), lambda));
      val_err.push_back(prediction_error(val_cross * alphas.back(), val.outputs(), task));
    }
    const auto best = static_cast<std::size_t>(first_argmin(val_err) - 1);
    run.lambda = grid[best];
    run.krr = prediction_error(test_cross * alphas[best], test.outputs(), task);
    runs[s] = run;
  });

  BaselineRow row;
  row.dataset = name;
  row.task = runs.front().task;
  row.runs = static_cast<std::int64_t>(runs.size());
  auto column = [&](double Run::*field) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.*field);
    return median(std::move(v));
  };
  row.kiir = column(&Run::kiir);
  row.kir = column(&Run::kir);
  row.krr = column(&Run::krr);
  row.kiir_epochs = column(&Run::kiir_t);
  row.kir_epochs = column(&Run::kir_t);
  row.krr_lambda = column(&Run::lambda);
  return row;
}

}  // namespace iir
