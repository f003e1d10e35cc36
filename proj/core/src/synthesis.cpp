#include "iir/synthesis.hpp"

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "iir/error.hpp"
#include "iir/linear.hpp"
#include "shortest.hpp"

namespace iir {

Vector trig_features(double s, int d) {
  detail::require(d >= 1, "trig_features: d must be >= 1");
  Vector phi(d);
  for (int k = 0; k < d; ++k) phi(k) = std::cos(k * s) + std::sin(k * s);
  return phi;
}

TrigProblem TrigProblem::with_random_weights(int d, std::uint64_t seed, double noise_sd) {
  detail::require(d >= 1, "TrigProblem: d must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  TrigProblem p;
  p.d = d;
  p.noise_sd = noise_sd;
  p.w_star.resize(d);
  for (int k = 0; k < d; ++k) p.w_star(k) = normal(rng);
  return p;
}

DataSet sample_trig(const TrigProblem& problem, Eigen::Index n, std::uint64_t seed) {
  detail::require(n >= 1, "sample_trig: n must be >= 1");
  detail::require(problem.w_star.size() == problem.d, "sample_trig: w* has wrong dimension");
  detail::require(problem.noise_sd >= 0.0, "sample_trig: noise_sd must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, problem.d);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector phi = trig_features(uniform(rng), problem.d);
    x.row(i) = phi.transpose();
    y(i) = phi.dot(problem.w_star);
    if (problem.noise_sd > 0.0) y(i) += problem.noise_sd * normal(rng);
  }
  return DataSet(std::move(x), std::move(y));
}

SpectrumSpec SpectrumSpec::polynomial_decay(int d, double decay, double r, double generator_norm,
                                            double noise_sd) {
  detail::require(d >= 1, "SpectrumSpec: d must be >= 1");
  SpectrumSpec spec;
  spec.eigenvalues.resize(d);
  for (int j = 0; j < d; ++j) spec.eigenvalues(j) = std::pow(j + 1.0, -decay);
  spec.eigenvalues /= spec.eigenvalues.sum();
  spec.generator_norm = generator_norm;
  spec.r = r;
  spec.noise_sd = noise_sd;
  spec.validate();
  return spec;
}

SpectrumSpec SpectrumSpec::geometric(int d, double ratio, double r, double generator_norm,
                                     double noise_sd) {
  detail::require(d >= 1, "SpectrumSpec: d must be >= 1");
  detail::require(ratio > 0.0 && ratio <= 1.0, "SpectrumSpec: ratio must lie in (0, 1]");
  SpectrumSpec spec;
  spec.eigenvalues.resize(d);
  for (int j = 0; j < d; ++j) spec.eigenvalues(j) = std::pow(ratio, j);
  spec.eigenvalues /= spec.eigenvalues.sum();
  spec.generator_norm = generator_norm;
  spec.r = r;
  spec.noise_sd = noise_sd;
  spec.validate();
  return spec;
}

void SpectrumSpec::validate() const {
  detail::require(eigenvalues.size() >= 1, "SpectrumSpec: empty spectrum");
  detail::require((eigenvalues.array() > 0.0).all() && eigenvalues.allFinite(),
                  "SpectrumSpec: eigenvalues must be positive");
  for (Eigen::Index j = 1; j < eigenvalues.size(); ++j) {
    detail::require(eigenvalues(j) <= eigenvalues(j - 1),
                    "SpectrumSpec: eigenvalues must be sorted in decreasing order");
  }
  detail::require(r >= 0.0 && std::isfinite(r), "SpectrumSpec: r must be >= 0");
  detail::require(generator_norm >= 0.0, "SpectrumSpec: generator norm must be >= 0");
  detail::require(noise_sd >= 0.0, "SpectrumSpec: noise_sd must be >= 0");
}

SourceProblem make_source_problem(const SpectrumSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto d = spec.eigenvalues.size();
  const Vector& sigma = spec.eigenvalues;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u(d);
  do {
    for (Eigen::Index j = 0; j < d; ++j) u(j) = normal(rng);
  } while (u.norm() == 0.0);
  u *= spec.generator_norm / u.norm();

  // Support point j is sqrt(tr T) e_j with probability p_j = sigma_j / tr T,
  // so every point has squared norm tr T. The L2(rho) normalized eigenfunction
  // for sigma_j equals 1/sqrt(p_j) at x_j and 0 elsewhere, which gives
  // g_rho(x_j) = sigma_j^r u_j / sqrt(p_j).
  const double trace = sigma.sum();
  Matrix support = Matrix::Zero(d, d);
  Vector weights = sigma / trace;
  Vector values(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    support(j, j) = std::sqrt(trace);
    values(j) = std::pow(sigma(j), spec.r) * u(j) / std::sqrt(weights(j));
  }
  weights /= weights.sum();

  SourceProblem p{DiscreteDistribution(std::move(support), std::move(weights), values,
                                       spec.noise_sd),
                  spec.r,
                  spec.generator_norm,
                  std::nullopt,
                  u,
                  sigma,
                  trace,
                  0.0};
  p.M = p.distribution.output_bound();
  if (spec.r >= 0.5) {
    Vector w(d);
    for (Eigen::Index j = 0; j < d; ++j) w(j) = std::pow(sigma(j), spec.r - 0.5) * u(j);
    p.w_dagger = std::move(w);
  }
  return p;
}

std::vector<Vector> exact_population_trajectory(const SourceProblem& problem, double gamma,
                                                Eigen::Index n, std::int64_t epochs) {
  detail::require(n >= 1, "exact_population_trajectory: n must be >= 1");
  detail::require(epochs >= 0, "exact_population_trajectory: epochs must be >= 0");
  check_step_size(gamma, problem.kappa, n, StepRange::lemma);
  const auto d = problem.spectrum.size();
  const double eta = gamma / static_cast<double>(n);
  Vector limit(d);
  Vector contraction(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    limit(j) = std::pow(problem.spectrum(j), problem.r - 0.5) * problem.generator(j);
    contraction(j) = 1.0 - eta * problem.spectrum(j);
  }
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(epochs) + 1);
  for (std::int64_t t = 0; t <= epochs; ++t) {
    const double steps = static_cast<double>(n) * static_cast<double>(t);
    Vector w(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      w(j) = (1.0 - std::pow(contraction(j), steps)) * limit(j);
    }
    out.push_back(std::move(w));
  }
  return out;
}

Preset Preset::parse(const std::string& text) {
  Preset p;
  if (text.rfind("trig-d", 0) == 0) {
    p.kind = Kind::trig;
    try {
      std::size_t used = 0;
      p.d = std::stoi(text.substr(6), &used);
      if (used == text.size() - 6 && p.d >= 1) return p;
    } catch (const std::logic_error&) {
    }
    throw ContractViolation("invalid trig preset '" + text + "'");
  }

  std::string args;
  if (text.rfind("source:", 0) == 0) {
    args = text.substr(7);
  } else if (text.rfind("source(", 0) == 0 && text.back() == ')') {
    args = text.substr(7, text.size() - 8);
  } else {
    throw ContractViolation("unknown preset '" + text + "'");
  }
  p.kind = Kind::source;
  p.noise_sd = 0.0;
  bool has_r = false;
  std::stringstream stream(args);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ContractViolation("preset field '" + item + "' lacks '='");
    const std::string key = item.substr(0, eq);
    double value = 0.0;
    try {
      value = std::stod(item.substr(eq + 1));
    } catch (const std::logic_error&) {
      throw ContractViolation("preset field '" + item + "' is not numeric");
    }
    if (key == "r") {
      p.r = value;
      has_r = true;
    } else if (key == "d") {
      p.d = static_cast<int>(value);
    } else if (key == "decay") {
      p.decay = value;
    } else if (key == "ratio") {
      p.ratio = value;
    } else if (key == "norm") {
      p.generator_norm = value;
    } else if (key == "noise") {
      p.noise_sd = value;
    } else {
      throw ContractViolation("unknown preset field '" + key + "'");
    }
  }
  if (!has_r) throw ContractViolation("source preset needs r=<value>");
  p.spectrum();  // validates
  return p;
}

std::string Preset::to_string() const {
  using detail::shortest;
  std::ostringstream out;
  if (kind == Kind::trig) {
    out << "trig-d" << d;
  } else {
    out << "source:r=" << shortest(r) << ",d=" << d;
    if (ratio > 0.0) {
      out << ",ratio=" << shortest(ratio);
    } else {
      out << ",decay=" << shortest(decay);
    }
    out << ",norm=" << shortest(generator_norm) << ",noise=" << shortest(noise_sd);
  }
  return out.str();
}

SpectrumSpec Preset::spectrum() const {
  detail::require(kind == Kind::source, "Preset::spectrum: not a source preset");
  if (ratio > 0.0) return SpectrumSpec::geometric(d, ratio, r, generator_norm, noise_sd);
  return SpectrumSpec::polynomial_decay(d, decay, r, generator_norm, noise_sd);
}

}  // namespace iir
