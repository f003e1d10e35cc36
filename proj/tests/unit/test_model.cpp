#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "iir/error.hpp"
#include "iir/model.hpp"
#include "iir/synthesis.hpp"
#include "test_support.hpp"

using namespace iir;

namespace {

DataSet one_point(double x, double y) { return DataSet(Matrix::Constant(1, 1, x), Vector::Constant(1, y)); }

DataSet orthogonal_pair() {
  Matrix x(2, 2);
  x << 1, 0, 0, 1;
  return DataSet(x, Vector::Ones(2));
}

}  // namespace

TEST_CASE("empirical risk of the zero predictor is the mean squared output") {
  CHECK(empirical_risk(Vector::Zero(1), one_point(1.0, 2.0)) == doctest::Approx(4.0));
}

TEST_CASE("empirical risk vanishes under exact interpolation") {
  CHECK(empirical_risk(Vector::Ones(2), orthogonal_pair()) == doctest::Approx(0.0));
}

TEST_CASE("empirical risk at (0.5, 0.5) on the orthogonal pair") {
  Vector w(2);
  w << 0.5, 0.5;
  // ((0.5 - 1)^2 + (0.5 - 1)^2) / 2
  CHECK(empirical_risk(w, orthogonal_pair()) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("empirical risk rejects a dimension mismatch") {
  CHECK_THROWS_AS(empirical_risk(Vector::Zero(3), orthogonal_pair()), ContractViolation);
}

TEST_CASE("population excess risk examples") {
  SUBCASE("zero predictor against a constant regression value") {
    DiscreteDistribution dist(Matrix::Ones(1, 1), Vector::Ones(1), Vector::Constant(1, 3.0));
    CHECK(population_excess_risk(Vector::Zero(1), dist) == doctest::Approx(9.0));
  }
  SUBCASE("linear regression function is represented exactly") {
    Matrix support(2, 1);
    support << 1, 2;
    Vector values(2);
    values << 1, 2;
    DiscreteDistribution dist(support, Vector::Constant(2, 0.5), values);
    CHECK(population_excess_risk(Vector::Ones(1), dist) == doctest::Approx(0.0));
  }
  SUBCASE("w dagger attains the infimum on an attainable source problem") {
    const auto problem =
        make_source_problem(SpectrumSpec::polynomial_decay(6, 1.0, 1.2, 2.0), 11);
    REQUIRE(problem.w_dagger.has_value());
    CHECK(population_excess_risk(*problem.w_dagger, problem.distribution) ==
          doctest::Approx(0.0).epsilon(1e-24));
  }
  SUBCASE("dimension mismatch") {
    DiscreteDistribution dist(Matrix::Ones(1, 2), Vector::Ones(1), Vector::Ones(1));
    CHECK_THROWS_AS(population_excess_risk(Vector::Zero(3), dist), ContractViolation);
  }
}

TEST_CASE("population operators examples") {
  SUBCASE("uniform on the standard basis of R^2") {
    Matrix support(2, 2);
    support << 1, 0, 0, 1;
    const auto ops = population_operators(
        DiscreteDistribution(support, Vector::Constant(2, 0.5), Vector::Ones(2)));
    CHECK(ops.T.isApprox(Matrix::Identity(2, 2) * 0.5));
    CHECK(ops.h.isApprox(Vector::Constant(2, 0.5)));
  }
  SUBCASE("single point with value zero") {
    const auto ops = population_operators(
        DiscreteDistribution(Matrix::Ones(1, 1), Vector::Ones(1), Vector::Zero(1)));
    CHECK(ops.T(0, 0) == 1.0);
    CHECK(ops.h(0) == 0.0);
  }
  SUBCASE("a zero-weight point is ignored") {
    Matrix support(2, 1);
    support << 1, 5;
    Vector weights(2);
    weights << 1, 0;
    Vector values(2);
    values << 2, 9;
    DiscreteDistribution dist(support, weights, values);
    const auto ops = population_operators(dist);
    CHECK(ops.T(0, 0) == 1.0);
    CHECK(ops.h(0) == 2.0);
    CHECK(dist.kappa() == 1.0);
  }
}

TEST_CASE("DataSet construction guards") {
  CHECK_THROWS_AS(DataSet(Matrix(0, 2), Vector(0)), ContractViolation);
  CHECK_THROWS_AS(DataSet(Matrix::Ones(2, 2), Vector::Ones(3)), ContractViolation);
  CHECK_THROWS_AS(DataSet(Matrix::Zero(3, 2), Vector::Ones(3)), ContractViolation);
  Matrix bad = Matrix::Ones(2, 2);
  bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(DataSet(bad, Vector::Ones(2)), ContractViolation);
  Vector labels(2);
  labels << 1, 0.5;
  CHECK_THROWS_AS(DataSet(Matrix::Ones(2, 1), labels, Task::classification), ContractViolation);
}

TEST_CASE("kappa and M bounds on a small sample") {
  Matrix x(3, 2);
  x << 1, 2, -3, 0, 0.5, 0.5;
  Vector y(3);
  y << 0.5, -4, 2;
  DataSet data(x, y);
  CHECK(kappa_bound(data) == 9.0);
  CHECK(m_bound(data) == 4.0);
}

TEST_CASE("DiscreteDistribution validates its weights") {
  CHECK_THROWS_AS(DiscreteDistribution(Matrix::Ones(2, 1), Vector::Constant(2, 0.4), Vector::Ones(2)),
                  ContractViolation);
  Vector negative(2);
  negative << 1.5, -0.5;
  CHECK_THROWS_AS(DiscreteDistribution(Matrix::Ones(2, 1), negative, Vector::Ones(2)),
                  ContractViolation);
  CHECK_THROWS_AS(DiscreteDistribution(Matrix::Ones(1, 1), Vector::Ones(1), Vector::Ones(1), -1.0),
                  ContractViolation);
}

TEST_CASE("sampling from a distribution is reproducible") {
  std::mt19937_64 rng(5);
  const auto dist = make_source_problem(SpectrumSpec::polynomial_decay(4, 1.0, 1.0, 1.0, 0.3), 2)
                        .distribution;
  std::mt19937_64 a(99), b(99);
  const auto first = dist.sample(50, a);
  const auto second = dist.sample(50, b);
  CHECK(first.inputs() == second.inputs());
  CHECK(first.outputs() == second.outputs());
}

TEST_CASE("risk report fills the optional fields from the problem") {
  const auto problem = make_source_problem(SpectrumSpec::polynomial_decay(3, 1.0, 1.0), 4);
  std::mt19937_64 rng(1);
  const auto data = problem.distribution.sample(20, rng);
  const auto with = risk_report(Vector::Zero(3), data, &problem);
  CHECK(with.excess_risk.has_value());
  CHECK(with.iterate_distance.has_value());
  CHECK(*with.iterate_distance == doctest::Approx(problem.w_dagger->norm()));
  const auto without = risk_report(Vector::Zero(3), data);
  CHECK_FALSE(without.excess_risk.has_value());
  CHECK(without.empirical_risk >= 0.0);
}

TEST_CASE("property: empirical risk is convex along random chords") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto data = test::gaussian_data(rng, 1 + trial % 13, 1 + trial % 5);
    const Vector w1 = test::gaussian_vector(rng, data.d());
    const Vector w2 = test::gaussian_vector(rng, data.d());
    const double lambda = unit(rng);
    const double mixed = empirical_risk(lambda * w1 + (1 - lambda) * w2, data);
    const double chord =
        lambda * empirical_risk(w1, data) + (1 - lambda) * empirical_risk(w2, data);
    CHECK(mixed <= chord + 1e-10);
  }
}

TEST_CASE("property: excess risk equals the quadratic form in T and h") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> size(1, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = size(rng);
    const int d = size(rng);
    Vector weights = test::gaussian_vector(rng, m).cwiseAbs();
    weights /= weights.sum();
    DiscreteDistribution dist(test::gaussian_matrix(rng, m, d), weights,
                              test::gaussian_vector(rng, m));
    const Vector w = test::gaussian_vector(rng, d);
    double mean_square = 0.0;
    for (int j = 0; j < m; ++j) mean_square += weights(j) * dist.regression_values()(j) *
                                                dist.regression_values()(j);
    const auto ops = population_operators(dist);
    const double quadratic = w.dot(ops.T * w) - 2.0 * w.dot(ops.h) + mean_square;
    const double direct = population_excess_risk(w, dist);
    CHECK(std::abs(direct - quadratic) <= 1e-12 * (1.0 + std::abs(direct)));
    CHECK(ops.mean_square_value == doctest::Approx(mean_square).epsilon(1e-12));
  }
}

TEST_CASE("property: T is symmetric positive semidefinite") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Vector weights = test::gaussian_vector(rng, 6).cwiseAbs();
    weights /= weights.sum();
    DiscreteDistribution dist(test::gaussian_matrix(rng, 6, 4), weights, Vector::Zero(6));
    const Matrix t = population_operators(dist).T;
    CHECK((t - t.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(t);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("property: kappa and M bounds are permutation invariant") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto data = test::gaussian_data(rng, 12, 3);
    std::vector<Eigen::Index> order(12);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto permuted = data.subset(order);
    CHECK(kappa_bound(permuted) == kappa_bound(data));
    CHECK(m_bound(permuted) == m_bound(data));
  }
}
