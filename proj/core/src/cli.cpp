#include "iir/cli.hpp"

#include <chrono>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "iir/error.hpp"
#include "iir/harness.hpp"
#include "iir/io.hpp"
#include "iir/kernel.hpp"
#include "iir/linalg.hpp"
#include "iir/linear.hpp"
#include "iir/stopping.hpp"
#include "iir/synthesis.hpp"

namespace iir {

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string gamma = "auto";
  std::string kernel = "none";
  std::string rule;
  std::string out;
  std::string format;
};

struct DataOptions {
  std::string preset = "trig-d5";
  std::string data;
  std::string task = "regression";
  int target = -1;
  bool header = false;
  std::int64_t n = 80;
  std::int64_t test_size = 2000;
  double validation_fraction = 0.2;
};

class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::optional<double> parse_gamma(const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const double g = std::stod(text, &used);
    if (used == text.size() && g > 0.0) return g;
  } catch (const std::logic_error&) {
  }
  throw ContractViolation("--gamma must be 'auto' or a positive number, got '" + text + "'");
}

std::optional<KernelSpec> parse_kernel(const std::string& text) {
  if (text == "none" || text == "primal") return std::nullopt;
  return KernelSpec::parse(text);
}

void add_data_options(CLI::App* cmd, DataOptions& data) {
  cmd->add_option("--preset", data.preset, "Problem preset: trig-d<d> or source:r=<r>,...")
      ->capture_default_str();
  cmd->add_option("--data", data.data, "Dataset file (.csv/.txt as CSV, otherwise LIBSVM)");
  cmd->add_option("--task", data.task, "regression or classification")->capture_default_str();
  cmd->add_option("--target", data.target, "CSV target column, 0-based; -1 = last")
      ->capture_default_str();
  cmd->add_flag("--header", data.header, "CSV file has a header row");
  cmd->add_option("--n", data.n, "Training sample size for presets")->capture_default_str();
  cmd->add_option("--test-size", data.test_size, "Fresh test points for presets")
      ->capture_default_str();
  cmd->add_option("--validation", data.validation_fraction, "Validation fraction")
      ->capture_default_str();
}

ExperimentConfig experiment_config(const GlobalOptions& g, const DataOptions& d) {
  ExperimentConfig config;
  config.preset = d.preset;
  if (!d.data.empty()) {
    config.data = load_dataset(d.data, parse_task(d.task), d.target, d.header);
  }
  config.kernel = parse_kernel(g.kernel);
  config.gamma = parse_gamma(g.gamma);
  config.n = d.n;
  config.test_size = d.test_size;
  config.validation_fraction = d.validation_fraction;
  config.seed = g.seed;
  return config;
}

nlohmann::json data_echo(const DataOptions& d) {
  nlohmann::json j{{"validation_fraction", d.validation_fraction}};
  if (d.data.empty()) {
    j["preset"] = Preset::parse(d.preset).to_string();
    j["n"] = d.n;
    j["test_size"] = d.test_size;
  } else {
    j["data"] = d.data;
    j["task"] = d.task;
    j["target"] = d.target;
    j["header"] = d.header;
  }
  return j;
}

void emit(const GlobalOptions& g, const std::string& contents, std::ostream& out) {
  if (g.out.empty()) {
    out << contents;
  } else {
    atomic_write(g.out, contents);
  }
}

ResultEnvelope envelope(const std::string& command, const GlobalOptions& g,
                        nlohmann::json config) {
  ResultEnvelope env;
  env.tool_version = tool_version();
  env.command = command;
  config["seed"] = g.seed;
  config["gamma"] = g.gamma;
  config["kernel"] = g.kernel;
  env.config = std::move(config);
  env.seed = g.seed;
  return env;
}

std::vector<std::int64_t> parse_grid(const std::string& text) {
  std::vector<std::int64_t> grid;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      grid.push_back(std::stoll(item));
    } catch (const std::logic_error&) {
      throw ContractViolation("--grid: '" + item + "' is not an integer");
    }
  }
  return grid;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// --- fit ------------------------------------------------------------------

struct FitOptions {
  DataOptions data;
  std::string method = "iir";
};

void run_fit(const GlobalOptions& g, const FitOptions& o, std::ostream& out) {
  const auto start = Clock::now();
  auto config = experiment_config(g, o.data);
  config.batch = o.method == "gd";
  const auto scenario = make_scenario(config, g.seed);
  const auto rule = g.rule.empty() ? StoppingRule::holdout(o.data.validation_fraction, 100)
                                   : StoppingRule::parse(g.rule);
  const auto learner = make_trainer(config);

  nlohmann::json metrics;
  std::int64_t epochs = 0;
  if (rule.a_priori()) {
    epochs = stopping_time(rule, scenario.train.n());
  } else {
    const auto selection = holdout_select(scenario.train, learner, rule, g.seed);
    epochs = selection.t_selected;
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [t, e] : selection.curve) curve.push_back({t, e});
    metrics["holdout_curve"] = curve;
  }
  auto trainer = learner(scenario.train);
  for (std::int64_t t = 0; t < epochs; ++t) trainer->advance();

  const Task task = scenario.train.task();
  metrics["epochs"] = epochs;
  metrics["coefficients"] = to_json(trainer->coefficients());
  metrics["train_error"] =
      prediction_error(trainer->predict(scenario.train.inputs()), scenario.train.outputs(), task);
  metrics["validation_error"] = prediction_error(trainer->predict(scenario.validation.inputs()),
                                                 scenario.validation.outputs(), task);
  metrics["test_error"] =
      prediction_error(trainer->predict(scenario.test.inputs()), scenario.test.outputs(), task);
  if (scenario.w_star) metrics["w_star"] = to_json(*scenario.w_star);
  if (!config.kernel && o.data.data.empty()) {
    const auto preset = Preset::parse(o.data.preset);
    if (preset.kind == Preset::Kind::source) {
      const auto problem = make_source_problem(preset.spectrum(), stream_seed(g.seed, 0));
      metrics["risk"] = to_json(risk_report(trainer->coefficients(), scenario.train, &problem));
    }
  }

  nlohmann::json echo = data_echo(o.data);
  echo["method"] = o.method;
  echo["rule"] = rule.to_string();
  auto env = envelope("fit", g, echo);
  env.metrics = metrics;
  env.elapsed_seconds = seconds_since(start);

  if (g.format == "csv") {
    std::string csv = "index,coefficient\n";
    const auto& c = trainer->coefficients();
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      csv += std::to_string(i) + ',' + nlohmann::json(c(i)).dump() + '\n';
    }
    emit(g, csv, out);
  } else {
    emit(g, env.dump(), out);
  }
}

// --- curve ------------------------------------------------------------------

struct CurveOptions {
  DataOptions data;
  std::int64_t epochs = 100;
  std::string method = "iir";
};

void run_curve(const GlobalOptions& g, const CurveOptions& o, std::ostream& out) {
  const auto start = Clock::now();
  auto config = experiment_config(g, o.data);
  config.epochs = o.epochs;
  config.batch = o.method == "gd";
  const auto curve = error_curve(config);
  if (g.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : curve) {
      rows.push_back({{"epoch", p.epoch}, {"train", p.train}, {"validation", p.validation},
                      {"test", p.test}});
    }
    nlohmann::json echo = data_echo(o.data);
    echo["epochs"] = o.epochs;
    echo["method"] = o.method;
    auto env = envelope("curve", g, echo);
    env.metrics = {{"curve", rows}, {"best_test_epoch", curve.empty() ? 0 : best_test_epoch(curve)}};
    env.elapsed_seconds = seconds_since(start);
    emit(g, env.dump(), out);
  } else {
    emit(g, curve_to_csv(curve), out);
  }
}

// --- rates ------------------------------------------------------------------

struct RatesOptions {
  std::string preset = "source:r=1.5,d=20,ratio=0.7,noise=0.5";
  std::string mode = "norm";
  std::string grid = "64,128,256,512,1024,2048,4096,8192";
  std::int64_t replicates = 50;
};

void run_rates(const GlobalOptions& g, const RatesOptions& o, std::ostream& out) {
  const auto start = Clock::now();
  const auto preset = Preset::parse(o.preset);
  detail::require(preset.kind == Preset::Kind::source, "rates: needs a source:r=... preset");
  RateConfig config;
  config.spectrum = preset.spectrum();
  config.mode = parse_rate_mode(o.mode);
  if (!g.rule.empty()) {
    config.rule = StoppingRule::parse(g.rule);
  } else {
    config.rule = config.mode == RateMode::norm ? StoppingRule::norm_rule(preset.r)
                                                : StoppingRule::risk_attainable(preset.r);
  }
  config.grid = parse_grid(o.grid);
  config.replicates = o.replicates;
  config.gamma = parse_gamma(g.gamma);
  config.seed = g.seed;
  const auto estimate = estimate_rate(config);

  const double r = preset.r;
  const double predicted = config.mode == RateMode::norm ? -(r - 0.5) / (2.0 * r + 1.0)
                                                         : -r / (r + 1.0);
  auto env = envelope("rates", g,
                      {{"preset", preset.to_string()},
                       {"mode", to_string(config.mode)},
                       {"rule", config.rule.to_string()},
                       {"grid", config.grid},
                       {"replicates", config.replicates}});
  env.metrics = to_json(estimate);
  env.metrics["predicted_slope"] = predicted;
  env.elapsed_seconds = seconds_since(start);
  emit(g, env.dump(), out);
}

// --- verify -----------------------------------------------------------------

struct VerifyOptions {
  std::string preset = "source:r=1.5";
  std::int64_t epochs = 200;
  std::int64_t n = 100;
  std::int64_t sample_n = 200;
  std::int64_t trials = 500;
  double delta = 0.1;
  std::int64_t instances = 100;
};

void run_verify(const GlobalOptions& g, const VerifyOptions& o, std::ostream& out) {
  const auto start = Clock::now();
  const auto preset = Preset::parse(o.preset);
  detail::require(preset.kind == Preset::Kind::source, "verify: needs a source:r=... preset");
  const auto problem = make_source_problem(preset.spectrum(), stream_seed(g.seed, 0));
  const double gamma = parse_gamma(g.gamma).value_or(1.0 / problem.kappa);
  check_step_size(gamma, problem.kappa, o.n, StepRange::theorem);

  const auto bounds = verify_bounds(problem, gamma, o.epochs, o.n);
  const auto identities = run_identity_checks(stream_seed(g.seed, 1), o.instances);
  const auto concentration = concentration_frequencies(problem.distribution, o.sample_n, o.delta,
                                                       o.trials, stream_seed(g.seed, 2));
  bool pass = bounds.pass && concentration.pass;
  for (const auto& c : identities) pass = pass && c.pass;

  auto env = envelope("verify", g,
                      {{"preset", preset.to_string()},
                       {"epochs", o.epochs},
                       {"n", o.n},
                       {"sample_n", o.sample_n},
                       {"trials", o.trials},
                       {"delta", o.delta},
                       {"instances", o.instances}});
  env.metrics = {{"bounds", to_json(bounds)},
                 {"identities", to_json(identities)},
                 {"concentration", to_json(concentration)},
                 {"status", std::string(pass ? "pass" : "fail")}};
  env.elapsed_seconds = seconds_since(start);
  emit(g, env.dump(), out);
  if (!pass) throw VerificationFailure("verification failed");
}

// --- bench ------------------------------------------------------------------

struct BenchOptions {
  DataOptions data;
  std::int64_t seeds = 5;
  std::int64_t max_epochs = 200;
};

void run_bench(const GlobalOptions& g, const BenchOptions& o, std::ostream& out) {
  const auto start = Clock::now();
  auto config = experiment_config(g, o.data);
  BaselineConfig baseline;
  baseline.kernel = config.kernel.value_or(KernelSpec::linear());
  baseline.max_epochs = o.max_epochs;
  baseline.seeds.clear();
  for (std::int64_t s = 0; s < o.seeds; ++s) {
    baseline.seeds.push_back(stream_seed(g.seed, static_cast<std::uint64_t>(s)));
  }
  const std::string name = o.data.data.empty() ? Preset::parse(o.data.preset).to_string()
                                               : std::filesystem::path(o.data.data).stem().string();
  const auto row = baseline_comparison(
      name, [&](std::uint64_t seed) { return make_scenario(config, seed); }, baseline);

  if (g.format == "json") {
    nlohmann::json echo = data_echo(o.data);
    echo["seeds"] = o.seeds;
    echo["max_epochs"] = o.max_epochs;
    echo["kernel"] = baseline.kernel.to_string();
    auto env = envelope("bench", g, echo);
    env.metrics = {{"rows", nlohmann::json::array({to_json(row)})}};
    env.elapsed_seconds = seconds_since(start);
    emit(g, env.dump(), out);
  } else {
    const std::vector<BaselineRow> rows{row};
    emit(g, baseline_to_csv(rows), out);
  }
}

// --- synth ------------------------------------------------------------------

struct SynthOptions {
  std::string preset = "trig-d5";
  std::int64_t n = 80;
};

void run_synth(const GlobalOptions& g, const SynthOptions& o, std::ostream& out) {
  ExperimentConfig config;
  config.preset = o.preset;
  config.n = o.n;
  config.test_size = 1;
  config.seed = g.seed;
  emit(g, dataset_to_csv(make_scenario(config, g.seed).train), out);
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Early-stopped incremental gradient methods for least squares", "iirctl"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed (default 0)");
  app.add_option("--gamma", g.gamma, "Step size, or 'auto' for 1/kappa");
  app.add_option("--kernel", g.kernel,
                 "none (primal), linear, gaussian:<width>, poly:<p>[,<c>], trig:<d>");
  app.add_option("--rule", g.rule,
                 "fixed:T, norm:r, risk:r, nonattainable, holdout[:fraction[,max_epochs]]");
  app.add_option("--out", g.out, "Output file (written atomically); stdout if absent");
  app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Train with a stopping rule and report errors");
  add_data_options(fit_cmd, fit.data);
  fit_cmd->add_option("--method", fit.method, "iir (incremental) or gd (batch)")
      ->check(CLI::IsMember({"iir", "gd"}));

  CurveOptions curve;
  auto* curve_cmd = app.add_subcommand("curve", "Train/validation/test error per epoch (CSV)");
  add_data_options(curve_cmd, curve.data);
  curve_cmd->add_option("--epochs", curve.epochs, "Number of epochs")->capture_default_str();
  curve_cmd->add_option("--method", curve.method, "iir or gd")->check(CLI::IsMember({"iir", "gd"}));

  RatesOptions rates;
  auto* rates_cmd = app.add_subcommand("rates", "Monte Carlo estimate of the convergence rate");
  rates_cmd->add_option("--preset", rates.preset, "source:r=<r>[,d=,decay=,norm=,noise=]")
      ->capture_default_str();
  rates_cmd->add_option("--mode", rates.mode, "norm or risk")->check(CLI::IsMember({"norm", "risk"}));
  rates_cmd->add_option("--grid", rates.grid, "Comma-separated sample sizes")->capture_default_str();
  rates_cmd->add_option("--replicates", rates.replicates, "Replicates per size")
      ->capture_default_str();

  VerifyOptions verify;
  auto* verify_cmd =
      app.add_subcommand("verify", "Check operator identities, bounds and concentration");
  verify_cmd->add_option("--preset", verify.preset, "source:r=<r>,...")->capture_default_str();
  verify_cmd->add_option("--epochs", verify.epochs, "Population epochs")->capture_default_str();
  verify_cmd->add_option("--n", verify.n, "Inner steps per population epoch")
      ->capture_default_str();
  verify_cmd->add_option("--sample-n", verify.sample_n, "Sample size for concentration")
      ->capture_default_str();
  verify_cmd->add_option("--trials", verify.trials, "Concentration trials")->capture_default_str();
  verify_cmd->add_option("--delta", verify.delta, "Confidence level delta")->capture_default_str();
  verify_cmd->add_option("--instances", verify.instances, "Random identity instances")
      ->capture_default_str();

  BenchOptions bench;
  bench.data.n = 800;
  auto* bench_cmd = app.add_subcommand("bench", "KIIR / KIR / KRR test error comparison");
  add_data_options(bench_cmd, bench.data);
  bench_cmd->add_option("--seeds", bench.seeds, "Number of seeds")->capture_default_str();
  bench_cmd->add_option("--max-epochs", bench.max_epochs, "Epoch budget for hold-out")
      ->capture_default_str();

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a generated dataset as CSV");
  synth_cmd->add_option("--preset", synth.preset, "Problem preset")->capture_default_str();
  synth_cmd->add_option("--n", synth.n, "Sample size")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*fit_cmd) {
      run_fit(g, fit, out);
    } else if (*curve_cmd) {
      run_curve(g, curve, out);
    } else if (*rates_cmd) {
      run_rates(g, rates, out);
    } else if (*verify_cmd) {
      run_verify(g, verify, out);
    } else if (*bench_cmd) {
      run_bench(g, bench, out);
    } else if (*synth_cmd) {
      run_synth(g, synth, out);
    }
  } catch (const VerificationFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitVerificationFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitOk;
}

}  // namespace iir
