#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "iir/error.hpp"
#include "iir/linear.hpp"
#include "iir/stopping.hpp"
#include "test_support.hpp"

using namespace iir;

TEST_CASE("stopping time examples") {
  CHECK(stopping_time(StoppingRule::norm_rule(1.5), 800) == 6);
  CHECK(stopping_time(StoppingRule::risk_attainable(1.0), 64) == 3);
  CHECK(stopping_time(StoppingRule::risk_nonattainable(), 1000) == 10);
  CHECK(stopping_time(StoppingRule::fixed(17), 5) == 17);
  CHECK(stopping_time(StoppingRule::holdout(0.2, 40), 5) == 40);
}

TEST_CASE("stopping time snaps exact powers instead of rounding them up") {
  // pow() may land just above an exact integer root.
  CHECK(stopping_time(StoppingRule::risk_nonattainable(), 1000000) == 100);
  CHECK(stopping_time(StoppingRule::norm_rule(1.5), 16) == 2);
  CHECK(stopping_time(StoppingRule::norm_rule(1.5), 17) == 3);
}

TEST_CASE("rules reject out-of-range parameters") {
  CHECK_THROWS_AS(StoppingRule::norm_rule(0.5), ContractViolation);
  CHECK_THROWS_AS(StoppingRule::risk_attainable(0.3), ContractViolation);
  CHECK_THROWS_AS(StoppingRule::fixed(-1), ContractViolation);
  CHECK(stopping_time(StoppingRule::fixed(0), 10) == 0);
  CHECK_THROWS_AS(StoppingRule::holdout(0.0, 10), ContractViolation);
  CHECK_THROWS_AS(StoppingRule::holdout(1.0, 10), ContractViolation);
  CHECK_THROWS_AS(StoppingRule::holdout(0.2, 0), ContractViolation);
  CHECK_THROWS_AS(stopping_time(StoppingRule::fixed(3), 0), ContractViolation);
  CHECK_THROWS_AS(rule_exponent(StoppingRule::holdout(0.2, 5)), ContractViolation);
}

TEST_CASE("rule text round trip") {
  for (const char* text : {"fixed:12", "norm:1.5", "risk:1", "nonattainable", "holdout:0.3,50"}) {
    const auto rule = StoppingRule::parse(text);
    CHECK(StoppingRule::parse(rule.to_string()).to_string() == rule.to_string());
  }
  const auto h = StoppingRule::parse("holdout");
  CHECK(h.validation_fraction == 0.2);
  CHECK(h.epochs == 100);
  CHECK_THROWS_AS(StoppingRule::parse("lepskii"), ContractViolation);
  CHECK_THROWS_AS(StoppingRule::parse("norm:abc"), ContractViolation);
}

TEST_CASE("consistency verdicts") {
  CHECK_FALSE(check_consistency_rate(StoppingRule::risk_nonattainable()));
  CHECK(check_consistency_rate(StoppingRule::norm_rule(2.0)));
  CHECK_FALSE(check_consistency_rate(StoppingRule::fixed(10)));
  CHECK_FALSE(check_consistency_rate(StoppingRule::norm_rule(1.0)));  // e = 1/3 boundary
  CHECK(check_consistency_rate(StoppingRule::norm_rule(1.01)));
  CHECK(check_consistency_rate(StoppingRule::risk_attainable(0.75)));
}

TEST_CASE("argmin with ties") {
  const std::vector<double> valley{3, 2, 1, 2, 3};
  const std::vector<double> tie{2, 1, 1};
  const std::vector<double> rising{1, 2, 3, 4};
  CHECK(first_argmin(valley) == 3);
  CHECK(first_argmin(tie) == 2);
  CHECK(first_argmin(rising) == 1);
  CHECK_THROWS_AS(first_argmin(std::vector<double>{}), ContractViolation);
}

TEST_CASE("property: stopping time is nondecreasing in n") {
  const StoppingRule rules[] = {StoppingRule::norm_rule(0.7), StoppingRule::norm_rule(3.0),
                                StoppingRule::risk_attainable(1.0),
                                StoppingRule::risk_nonattainable(), StoppingRule::fixed(4)};
  for (const auto& rule : rules) {
    std::int64_t previous = 0;
    for (std::int64_t n = 1; n <= 20000; n += 1 + n / 50) {
      const auto t = stopping_time(rule, n);
      CHECK(t >= previous);
      previous = t;
    }
  }
}

TEST_CASE("property: norm rule exponent is recovered at large n") {
  for (double r : {0.75, 1.5, 3.0}) {
    for (double n : {1e3, 1e4, 1e5, 1e6}) {
      const auto t = stopping_time(StoppingRule::norm_rule(r), static_cast<std::int64_t>(n));
      CHECK(std::abs(std::log(t) / std::log(n) - 1.0 / (2 * r + 1)) <= 0.02);
    }
  }
}

TEST_CASE("prediction error picks the metric from the task") {
  Vector p(2), y(2);
  p << 1, 3;
  y << 1, 1;
  CHECK(prediction_error(p, y, Task::regression) == doctest::Approx(std::sqrt(2.0)));
  Vector labels(2);
  labels << 1, -1;
  CHECK(prediction_error(p, labels, Task::classification) == 0.5);
}

TEST_CASE("hold-out split sizes and guards") {
  std::mt19937_64 rng(1);
  const auto data = test::gaussian_data(rng, 10, 2);
  const auto split = split_holdout(data, 0.2, 3);
  CHECK(split.validation.n() == 2);
  CHECK(split.train.n() == 8);
  const DataSet single(Matrix::Ones(1, 1), Vector::Ones(1));
  CHECK_THROWS_AS(split_holdout(single, 0.2, 0), ContractViolation);
  CHECK_THROWS_AS(split_holdout(data, 0.01, 0), ContractViolation);
}

TEST_CASE("hold-out selection returns the first validation minimum") {
  std::mt19937_64 rng(2);
  const auto data = test::gaussian_data(rng, 40, 6);
  const auto rule = StoppingRule::holdout(0.25, 60);
  const auto result = holdout_select(data, linear_trainer(LinearMethod::incremental), rule, 9);
  REQUIRE(result.curve.size() == 60);
  std::vector<double> errors;
  for (std::size_t i = 0; i < result.curve.size(); ++i) {
    CHECK(result.curve[i].first == static_cast<std::int64_t>(i + 1));
    errors.push_back(result.curve[i].second);
  }
  CHECK(result.t_selected == first_argmin(errors));

  // The same curve by hand on the same split.
  const auto split = split_holdout(data, 0.25, 9);
  auto trainer = linear_trainer(LinearMethod::incremental)(split.train);
  for (std::size_t i = 0; i < 60; ++i) {
    trainer->advance();
    const double e = prediction_error(trainer->predict(split.validation.inputs()),
                                      split.validation.outputs(), Task::regression);
    CHECK(e == errors[i]);
  }
}

TEST_CASE("hold-out selection is deterministic per seed") {
  std::mt19937_64 rng(3);
  const auto data = test::gaussian_data(rng, 30, 3);
  const auto rule = StoppingRule::holdout(0.2, 25);
  const auto learner = linear_trainer(LinearMethod::incremental);
  const auto a = holdout_select(data, learner, rule, 4);
  const auto b = holdout_select(data, learner, rule, 4);
  CHECK(a.t_selected == b.t_selected);
  CHECK(a.curve == b.curve);
  CHECK_THROWS_AS(holdout_select(data, learner, StoppingRule::fixed(3), 4), ContractViolation);
}
