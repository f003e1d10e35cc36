#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace iir {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Task { regression, classification };

std::string to_string(Task task);
Task parse_task(const std::string& name);

/// A finite sample (x_i, y_i), i = 1..n. Inputs are stored row-wise, so
/// `inputs().row(i)` is x_i in R^d.
class DataSet {
 public:
  DataSet(Matrix inputs, Vector outputs, Task task = Task::regression);

  Eigen::Index n() const noexcept { return inputs_.rows(); }
  Eigen::Index d() const noexcept { return inputs_.cols(); }
  const Matrix& inputs() const noexcept { return inputs_; }
  const Vector& outputs() const noexcept { return outputs_; }
  Task task() const noexcept { return task_; }

  auto x(Eigen::Index i) const { return inputs_.row(i); }
  double y(Eigen::Index i) const { return outputs_(i); }

  /// Rows selected by `indices`, in the given order.
  DataSet subset(const std::vector<Eigen::Index>& indices) const;

 private:
  Matrix inputs_;
  Vector outputs_;
  Task task_;
};

/// max_i ||x_i||^2
double kappa_bound(const DataSet& data);
/// max_i |y_i|
double m_bound(const DataSet& data);

/// Exact population oracle: a finitely supported input law with the
/// regression function tabulated on the support. Outputs are drawn as
/// f(x) + N(0, noise_sd^2); population quantities never see the noise.
class DiscreteDistribution {
 public:
  DiscreteDistribution(Matrix support, Vector weights, Vector regression_values,
                       double noise_sd = 0.0);

  const Matrix& support() const noexcept { return support_; }
  const Vector& weights() const noexcept { return weights_; }
  const Vector& regression_values() const noexcept { return values_; }
  double noise_sd() const noexcept { return noise_sd_; }
  Eigen::Index dimension() const noexcept { return support_.cols(); }
  Eigen::Index support_size() const noexcept { return support_.rows(); }

  /// max over the support (positive weight only) of ||x||^2.
  double kappa() const;
  /// Bound on |y|. Exact when noise_sd == 0; otherwise max|f| + 6 noise_sd.
  double output_bound() const;

  DataSet sample(Eigen::Index n, std::mt19937_64& rng) const;

 private:
  Matrix support_;
  Vector weights_;
  Vector values_;
  double noise_sd_;
};

/// T = sum_j p_j x_j x_j^T and h = S* g = sum_j p_j f(x_j) x_j.
struct PopulationOperators {
  Matrix T;
  Vector h;
  double mean_square_value = 0.0;  // sum_j p_j f(x_j)^2
};

PopulationOperators population_operators(const DiscreteDistribution& dist);

/// (1/n) sum_i (<w, x_i> - y_i)^2
double empirical_risk(const Vector& w, const DataSet& data);

/// ||S w - g||_rho^2 = sum_j p_j (<w, x_j> - f(x_j))^2
double population_excess_risk(const Vector& w, const DiscreteDistribution& dist);

/// Problem with a planted source condition g_rho = L^r g. The second-moment
/// operator is diagonal in the standard basis with entries `spectrum`, and
/// `generator` holds the coordinates of g in the matching eigenbasis of L.
struct SourceProblem {
  DiscreteDistribution distribution;
  double r = 0.0;
  double g_norm = 0.0;
  std::optional<Vector> w_dagger;  // present iff r >= 1/2
  Vector generator;
  Vector spectrum;
  double kappa = 0.0;
  double M = 0.0;
};

struct RiskReport {
  double empirical_risk = 0.0;
  std::optional<double> excess_risk;
  std::optional<double> iterate_distance;
};

RiskReport risk_report(const Vector& w, const DataSet& data,
                       const SourceProblem* problem = nullptr);

}  // namespace iir
