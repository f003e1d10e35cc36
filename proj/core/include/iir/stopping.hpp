#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iir/model.hpp"
#include "iir/trainer.hpp"

namespace iir {

/// How many epochs to run. The a priori variants map the sample size to an
/// epoch count t*(n) = ceil(n^e):
///   norm_rule           e = 1/(2r+1), r > 1/2
///   risk_attainable     e = 1/(2(1+r)), r > 1/2
///   risk_nonattainable  e = 1/3 (r in ]0, 1/2], exponent independent of r)
/// `holdout` picks the epoch by validation error instead.
struct StoppingRule {
  enum class Variant { fixed, norm_rule, risk_attainable, risk_nonattainable, holdout };

  Variant variant = Variant::fixed;
  std::int64_t epochs = 1;  // fixed: T; holdout: max_epochs
  double r = 1.0;
  double validation_fraction = 0.2;

  static StoppingRule fixed(std::int64_t epochs);
  static StoppingRule norm_rule(double r);
  static StoppingRule risk_attainable(double r);
  static StoppingRule risk_nonattainable();
  static StoppingRule holdout(double validation_fraction, std::int64_t max_epochs);

  /// "fixed:T", "norm:r", "risk:r", "nonattainable", "holdout[:fraction[,max_epochs]]".
  static StoppingRule parse(const std::string& text);
  std::string to_string() const;

  bool a_priori() const noexcept { return variant != Variant::holdout; }
  void validate() const;
};

/// Exponent e of t*(n) = ceil(n^e); 0 for `fixed`. Throws for holdout.
double rule_exponent(const StoppingRule& rule);

std::int64_t stopping_time(const StoppingRule& rule, std::int64_t n);

/// True iff t*(n) -> infinity and t*(n)^3 log n / n -> 0, i.e. 0 < e < 1/3.
/// The boundary e = 1/3 (the non-attainable rule) reports false.
bool check_consistency_rate(const StoppingRule& rule);

/// 1-based index of the first minimum.
std::int64_t first_argmin(std::span<const double> errors);

/// RMSE for regression targets, misclassification rate for +-1 labels.
double prediction_error(const Vector& predictions, const Vector& targets, Task task);

struct HoldoutSplit {
  DataSet train;
  DataSet validation;
};

/// One seeded shuffle, the first round(fraction * n) points go to validation.
HoldoutSplit split_holdout(const DataSet& data, double validation_fraction, std::uint64_t seed);

struct HoldoutResult {
  std::int64_t t_selected = 0;
  std::vector<std::pair<std::int64_t, double>> curve;  // (epoch, validation error)
};

HoldoutResult holdout_select(const DataSet& data, const TrainerFactory& learner,
                             const StoppingRule& rule, std::uint64_t seed);

}  // namespace iir
