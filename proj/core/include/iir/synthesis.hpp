#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iir/model.hpp"

namespace iir {

/// phi_k(s) = cos((k-1)s) + sin((k-1)s), k = 1..d.
Vector trig_features(double s, int d);

/// y = <w*, Phi(x)> + N(0, noise_sd^2), x ~ U[0, 1].
struct TrigProblem {
  int d = 5;
  Vector w_star;
  double noise_sd = 1.0;

  /// w* with i.i.d. standard normal entries drawn from `seed`.
  static TrigProblem with_random_weights(int d, std::uint64_t seed, double noise_sd = 1.0);
};

/// Rows are Phi(x_i), outputs are noisy responses. Deterministic given seed.
DataSet sample_trig(const TrigProblem& problem, Eigen::Index n, std::uint64_t seed);

/// Target spectrum of the second-moment operator and the source parameters.
struct SpectrumSpec {
  Vector eigenvalues;  // positive, non-increasing
  double generator_norm = 1.0;
  double r = 1.0;
  double noise_sd = 0.0;

  /// sigma_j proportional to j^-decay, j = 1..d, normalized to unit trace.
  static SpectrumSpec polynomial_decay(int d, double decay, double r,
                                       double generator_norm = 1.0, double noise_sd = 0.0);
  /// sigma_j proportional to ratio^(j-1), normalized to unit trace.
  static SpectrumSpec geometric(int d, double ratio, double r, double generator_norm = 1.0,
                                double noise_sd = 0.0);
  void validate() const;
};

/// Realizes T = diag(sigma) with support sqrt(tr T) e_j drawn with probability
/// sigma_j / tr T, so kappa = tr T. The target g_rho has coordinates
/// sigma_j^r u_j in the eigenbasis of L, where u is uniform on the sphere of
/// radius generator_norm. w_dagger = T^(r-1/2) u is recorded when r >= 1/2.
SourceProblem make_source_problem(const SpectrumSpec& spec, std::uint64_t seed);

/// Population iterates w_0..w_epochs in closed form:
/// (w_t)_j = (1 - (1 - eta sigma_j)^(n t)) sigma_j^(r-1/2) u_j, eta = gamma/n.
std::vector<Vector> exact_population_trajectory(const SourceProblem& problem, double gamma,
                                                Eigen::Index n, std::int64_t epochs);

/// Named problem presets: "trig-d5" and
/// "source:r=<r>[,d=..][,decay=..|,ratio=..][,norm=..][,noise=..]"
/// (the form "source(r=..,decay=..)" is accepted as well).
struct Preset {
  enum class Kind { trig, source };
  Kind kind = Kind::trig;
  int d = 5;
  double noise_sd = 1.0;
  double r = 1.0;
  double decay = 1.0;
  double ratio = 0.0;  // > 0 selects a geometric spectrum
  double generator_norm = 1.0;

  static Preset parse(const std::string& text);
  std::string to_string() const;
  SpectrumSpec spectrum() const;
};

}  // namespace iir
