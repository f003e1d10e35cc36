#include "iir/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "iir/error.hpp"
#include "iir/kernel.hpp"
#include "shortest.hpp"

namespace iir {

StoppingRule StoppingRule::fixed(std::int64_t epochs) {
  StoppingRule rule;
  rule.variant = Variant::fixed;
  rule.epochs = epochs;
  rule.validate();
  return rule;
}

StoppingRule StoppingRule::norm_rule(double r) {
  StoppingRule rule;
  rule.variant = Variant::norm_rule;
  rule.r = r;
  rule.validate();
  return rule;
}

StoppingRule StoppingRule::risk_attainable(double r) {
  StoppingRule rule;
  rule.variant = Variant::risk_attainable;
  rule.r = r;
  rule.validate();
  return rule;
}

StoppingRule StoppingRule::risk_nonattainable() {
  StoppingRule rule;
  rule.variant = Variant::risk_nonattainable;
  rule.r = 0.5;
  return rule;
}

StoppingRule StoppingRule::holdout(double validation_fraction, std::int64_t max_epochs) {
  StoppingRule rule;
  rule.variant = Variant::holdout;
  rule.validation_fraction = validation_fraction;
  rule.epochs = max_epochs;
  rule.validate();
  return rule;
}

StoppingRule StoppingRule::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (name == "fixed" && !args.empty()) return fixed(std::stoll(args));
    if (name == "norm" && !args.empty()) return norm_rule(std::stod(args));
    if (name == "risk" && !args.empty()) return risk_attainable(std::stod(args));
    if (name == "nonattainable" && args.empty()) return risk_nonattainable();
    if (name == "holdout") {
      double fraction = 0.2;
      std::int64_t max_epochs = 100;
      if (!args.empty()) {
        const auto comma = args.find(',');
        fraction = std::stod(args.substr(0, comma));
        if (comma != std::string::npos) max_epochs = std::stoll(args.substr(comma + 1));
      }
      return holdout(fraction, max_epochs);
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ContractViolation*>(&e) != nullptr) throw;
  }
  throw ContractViolation("invalid stopping rule '" + text + "'");
}

std::string StoppingRule::to_string() const {
  std::ostringstream out;
  switch (variant) {
    case Variant::fixed: out << "fixed:" << epochs; break;
    case Variant::norm_rule: out << "norm:" << detail::shortest(r); break;
    case Variant::risk_attainable: out << "risk:" << detail::shortest(r); break;
    case Variant::risk_nonattainable: out << "nonattainable"; break;
    case Variant::holdout: out << "holdout:" << detail::shortest(validation_fraction) << ',' << epochs; break;
  }
  return out.str();
}

void StoppingRule::validate() const {
  switch (variant) {
    case Variant::fixed:
      detail::require(epochs >= 0, "fixed rule: epochs must be >= 0");
      break;
    case Variant::norm_rule:
    case Variant::risk_attainable:
      detail::require(r > 0.5 && std::isfinite(r), "rule requires r > 1/2 (attainable case)");
      break;
    case Variant::risk_nonattainable: break;
    case Variant::holdout:
      detail::require(validation_fraction > 0.0 && validation_fraction < 1.0,
                      "holdout rule: validation fraction must lie in (0, 1)");
      detail::require(epochs >= 1, "holdout rule: max_epochs must be >= 1");
      break;
  }
}

double rule_exponent(const StoppingRule& rule) {
  rule.validate();
  switch (rule.variant) {
    case StoppingRule::Variant::fixed: return 0.0;
    case StoppingRule::Variant::norm_rule: return 1.0 / (2.0 * rule.r + 1.0);
    case StoppingRule::Variant::risk_attainable: return 1.0 / (2.0 * (1.0 + rule.r));
    case StoppingRule::Variant::risk_nonattainable: return 1.0 / 3.0;
    case StoppingRule::Variant::holdout: break;
  }
  throw ContractViolation("hold-out selection has no a priori exponent");
}

std::int64_t stopping_time(const StoppingRule& rule, std::int64_t n) {
  detail::require(n >= 1, "stopping_time: n must be >= 1");
  rule.validate();
  if (rule.variant == StoppingRule::Variant::fixed ||
      rule.variant == StoppingRule::Variant::holdout) {
    return rule.epochs;
  }
  const double value = std::pow(static_cast<double>(n), rule_exponent(rule));
  // Snap values within round-off of an integer (1000^(1/3) is 9.999...).
  const double nearest = std::round(value);
  if (std::abs(value - nearest) <= 1e-9 * nearest) return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(value));
}

bool check_consistency_rate(const StoppingRule& rule) {
  if (!rule.a_priori()) return false;
  const double e = rule_exponent(rule);
  return e > 0.0 && 3.0 * e < 1.0;
}

std::int64_t first_argmin(std::span<const double> errors) {
  detail::require(!errors.empty(), "first_argmin: empty curve");
  const auto it = std::min_element(errors.begin(), errors.end());
  return static_cast<std::int64_t>(it - errors.begin()) + 1;
}

double prediction_error(const Vector& predictions, const Vector& targets, Task task) {
  detail::require(predictions.size() == targets.size() && targets.size() >= 1,
                  "prediction_error: length mismatch");
  if (task == Task::classification) return classification_error(predictions, targets);
  return std::sqrt((predictions - targets).squaredNorm() / static_cast<double>(targets.size()));
}

HoldoutSplit split_holdout(const DataSet& data, double validation_fraction, std::uint64_t seed) {
  detail::require(validation_fraction > 0.0 && validation_fraction < 1.0,
                  "split_holdout: fraction must lie in (0, 1)");
  const auto n = data.n();
  const auto n_val = static_cast<Eigen::Index>(std::llround(validation_fraction * n));
  if (n_val < 1 || n - n_val < 1) {
    throw ContractViolation("hold-out split of " + std::to_string(n) +
                            " points leaves an empty train or validation part");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Eigen::Index> val(order.begin(), order.begin() + n_val);
  std::vector<Eigen::Index> train(order.begin() + n_val, order.end());
  return {data.subset(train), data.subset(val)};
}

HoldoutResult holdout_select(const DataSet& data, const TrainerFactory& learner,
                             const StoppingRule& rule, std::uint64_t seed) {
  detail::require(rule.variant == StoppingRule::Variant::holdout,
                  "holdout_select: rule must be the hold-out variant");
  rule.validate();
  const auto split = split_holdout(data, rule.validation_fraction, seed);
  auto trainer = learner(split.train);

  HoldoutResult result;
  std::vector<double> errors;
  errors.reserve(static_cast<std::size_t>(rule.epochs));
  for (std::int64_t t = 1; t <= rule.epochs; ++t) {
    trainer->advance();
    const double err = prediction_error(trainer->predict(split.validation.inputs()),
                                        split.validation.outputs(), data.task());
    errors.push_back(err);
    result.curve.emplace_back(t, err);
  }
  result.t_selected = first_argmin(errors);
  return result;
}

}  // namespace iir
