#include "iir/model.hpp"

#include <cmath>

#include "iir/error.hpp"

namespace iir {

std::string to_string(Task task) {
  return task == Task::classification ? "classification" : "regression";
}

Task parse_task(const std::string& name) {
  if (name == "regression") return Task::regression;
  if (name == "classification") return Task::classification;
  throw ContractViolation("unknown task '" + name + "'");
}

DataSet::DataSet(Matrix inputs, Vector outputs, Task task)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), task_(task) {
  detail::require(inputs_.rows() >= 1, "DataSet: need at least one sample");
  detail::require(inputs_.cols() >= 1, "DataSet: inputs must have dimension >= 1");
  detail::require(inputs_.rows() == outputs_.size(),
                  "DataSet: inputs and outputs have different lengths");
  detail::require(inputs_.allFinite() && outputs_.allFinite(),
                  "DataSet: non-finite value in sample");
  detail::require(inputs_.rowwise().squaredNorm().maxCoeff() > 0.0,
                  "DataSet: all inputs are zero (kappa would be 0)");
  if (task_ == Task::classification) {
    for (Eigen::Index i = 0; i < outputs_.size(); ++i) {
      detail::require(outputs_(i) == 1.0 || outputs_(i) == -1.0,
                      "DataSet: classification labels must be -1 or +1");
    }
  }
}

DataSet DataSet::subset(const std::vector<Eigen::Index>& indices) const {
  Matrix x(static_cast<Eigen::Index>(indices.size()), d());
  Vector y(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto i = indices[k];
    detail::require(i >= 0 && i < n(), "DataSet::subset: index out of range");
    x.row(static_cast<Eigen::Index>(k)) = inputs_.row(i);
    y(static_cast<Eigen::Index>(k)) = outputs_(i);
  }
  return DataSet(std::move(x), std::move(y), task_);
}

double kappa_bound(const DataSet& data) {
  return data.inputs().rowwise().squaredNorm().maxCoeff();
}

double m_bound(const DataSet& data) { return data.outputs().cwiseAbs().maxCoeff(); }

DiscreteDistribution::DiscreteDistribution(Matrix support, Vector weights,
                                           Vector regression_values, double noise_sd)
    : support_(std::move(support)),
      weights_(std::move(weights)),
      values_(std::move(regression_values)),
      noise_sd_(noise_sd) {
  detail::require(support_.rows() >= 1, "DiscreteDistribution: empty support");
  detail::require(weights_.size() == support_.rows() && values_.size() == support_.rows(),
                  "DiscreteDistribution: support, weights and values disagree in length");
  detail::require((weights_.array() >= 0.0).all(),
                  "DiscreteDistribution: negative weight");
  detail::require(std::abs(weights_.sum() - 1.0) <= 1e-12,
                  "DiscreteDistribution: weights must sum to 1");
  detail::require(noise_sd_ >= 0.0 && std::isfinite(noise_sd_),
                  "DiscreteDistribution: noise_sd must be finite and >= 0");
  detail::require(support_.allFinite() && values_.allFinite(),
                  "DiscreteDistribution: non-finite support or values");
}

double DiscreteDistribution::kappa() const {
  double k = 0.0;
  for (Eigen::Index j = 0; j < support_.rows(); ++j) {
    if (weights_(j) > 0.0) k = std::max(k, support_.row(j).squaredNorm());
  }
  return k;
}

double DiscreteDistribution::output_bound() const {
  double m = 0.0;
  for (Eigen::Index j = 0; j < values_.size(); ++j) {
    if (weights_(j) > 0.0) m = std::max(m, std::abs(values_(j)));
  }
  return m + 6.0 * noise_sd_;
}

DataSet DiscreteDistribution::sample(Eigen::Index n, std::mt19937_64& rng) const {
  detail::require(n >= 1, "DiscreteDistribution::sample: n must be >= 1");
  std::discrete_distribution<Eigen::Index> pick(weights_.data(),
                                                weights_.data() + weights_.size());
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix x(n, dimension());
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto j = pick(rng);
    x.row(i) = support_.row(j);
    y(i) = values_(j);
    if (noise_sd_ > 0.0) y(i) += noise_sd_ * noise(rng);
  }
  return DataSet(std::move(x), std::move(y));
}

PopulationOperators population_operators(const DiscreteDistribution& dist) {
  const auto& x = dist.support();
  const auto& p = dist.weights();
  const auto& f = dist.regression_values();
  PopulationOperators ops;
  ops.T = x.transpose() * p.asDiagonal() * x;
  ops.T = 0.5 * (ops.T + ops.T.transpose()).eval();
  ops.h = x.transpose() * p.cwiseProduct(f);
  ops.mean_square_value = p.dot(f.cwiseAbs2());
  return ops;
}

double empirical_risk(const Vector& w, const DataSet& data) {
  detail::require(w.size() == data.d(), "empirical_risk: dimension mismatch");
  return (data.inputs() * w - data.outputs()).squaredNorm() / static_cast<double>(data.n());
}

double population_excess_risk(const Vector& w, const DiscreteDistribution& dist) {
  detail::require(w.size() == dist.dimension(),
                  "population_excess_risk: dimension mismatch");
  const Vector residual = dist.support() * w - dist.regression_values();
  return dist.weights().dot(residual.cwiseAbs2());
}

RiskReport risk_report(const Vector& w, const DataSet& data, const SourceProblem* problem) {
  RiskReport report;
  report.empirical_risk = empirical_risk(w, data);
  if (problem != nullptr) {
    report.excess_risk = population_excess_risk(w, problem->distribution);
    if (problem->w_dagger) report.iterate_distance = (w - *problem->w_dagger).norm();
  }
  return report;
}

}  // namespace iir
