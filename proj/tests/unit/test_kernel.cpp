#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "iir/error.hpp"
#include "iir/kernel.hpp"
#include "iir/linear.hpp"
#include "iir/synthesis.hpp"
#include "test_support.hpp"

using namespace iir;

namespace {

DualState dual(const Matrix& g, double gamma) {
  return DualState::zero(std::make_shared<const Matrix>(g), gamma);
}

}  // namespace

TEST_CASE("gram matrix examples") {
  Matrix basis(2, 2);
  basis << 1, 0, 0, 1;
  CHECK(gram_matrix(KernelSpec::linear(), basis).isApprox(Matrix::Identity(2, 2)));

  std::mt19937_64 rng(1);
  const Matrix points = test::gaussian_matrix(rng, 6, 3);
  const Matrix g = gram_matrix(KernelSpec::gaussian(0.7), points);
  for (int i = 0; i < 6; ++i) CHECK(g(i, i) == 1.0);

  Matrix line(2, 1);
  line << 0, std::sqrt(2.0);
  const Matrix h = gram_matrix(KernelSpec::gaussian(1.0), line);
  CHECK(h(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(h(0, 1) == doctest::Approx(0.3679).epsilon(1e-4));
}

TEST_CASE("kernel parameter validation") {
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0), ContractViolation);
  CHECK_THROWS_AS(KernelSpec::gaussian(-1.0), ContractViolation);
  CHECK_THROWS_AS(KernelSpec::polynomial(0, 1.0), ContractViolation);
  CHECK_THROWS_AS(KernelSpec::polynomial(2, -1.0), ContractViolation);
  CHECK_THROWS_AS(KernelSpec::trig_dictionary(0), ContractViolation);
  CHECK_THROWS_AS(gram_matrix(KernelSpec::linear(), Matrix(0, 2)), ContractViolation);
}

TEST_CASE("kernel spec text round trip") {
  for (const char* text : {"linear", "gaussian:0.5", "poly:3,2", "trig:7"}) {
    const auto spec = KernelSpec::parse(text);
    CHECK(KernelSpec::parse(spec.to_string()).to_string() == spec.to_string());
  }
  CHECK(KernelSpec::parse("rbf:2").kind == KernelSpec::Kind::gaussian);
  CHECK_THROWS_AS(KernelSpec::parse("sigmoid"), ContractViolation);
  CHECK_THROWS_AS(KernelSpec::parse("gaussian:x"), ContractViolation);
}

TEST_CASE("polynomial and trig kernels against direct evaluation") {
  Vector a(2), b(2);
  a << 0.5, -1.0;
  b << 2.0, 0.25;
  CHECK(KernelSpec::polynomial(3, 1.5)(a, b) == doctest::Approx(std::pow(0.75 + 1.5, 3)));
  const auto trig = KernelSpec::trig_dictionary(4);
  CHECK(trig(a, b) == doctest::Approx(trig_features(0.5, 4).dot(trig_features(2.0, 4))));
}

TEST_CASE("kiir epoch examples") {
  SUBCASE("single coordinate") {
    const auto next = kiir_epoch(dual(Matrix::Ones(1, 1), 1.0), Vector::Ones(1));
    CHECK(next.alpha(0) == 1.0);
    CHECK(next.epoch == 1);
  }
  SUBCASE("alpha solving G alpha = y is a fixed point") {
    std::mt19937_64 rng(5);
    const Matrix points = test::gaussian_matrix(rng, 5, 2);
    const Matrix g = gram_matrix(KernelSpec::gaussian(1.0), points);
    const Vector alpha = test::gaussian_vector(rng, 5);
    auto state = dual(g, 1.0);
    state.alpha = alpha;
    const Vector y = g * alpha;
    CHECK((kiir_epoch(state, y).alpha - alpha).norm() <= 1e-14);
    CHECK((kir_epoch(state, y).alpha - alpha).norm() <= 1e-14);
  }
  SUBCASE("inner step i touches coordinate i only, with the current residual") {
    std::mt19937_64 rng(6);
    const Matrix points = test::gaussian_matrix(rng, 4, 2);
    const Matrix g = gram_matrix(KernelSpec::polynomial(2, 1.0), points);
    const Vector y = test::gaussian_vector(rng, 4);
    const double gamma = DualState::default_step_size(g);
    Vector alpha = Vector::Zero(4);
    for (int i = 0; i < 4; ++i) alpha(i) -= gamma / 4.0 * (g.row(i).dot(alpha) - y(i));
    CHECK((kiir_epoch(dual(g, gamma), y).alpha - alpha).norm() <= 1e-14);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(kiir_epoch(dual(Matrix::Identity(3, 3), 1.0), Vector::Ones(2)),
                    ContractViolation);
    CHECK_THROWS_AS(kir_epoch(dual(Matrix::Identity(3, 3), 1.0), Vector::Ones(4)),
                    ContractViolation);
  }
}

TEST_CASE("kir epoch with one point equals kiir") {
  const Matrix g = Matrix::Constant(1, 1, 2.0);
  const Vector y = Vector::Constant(1, -0.3);
  CHECK(kir_epoch(dual(g, 0.5), y).alpha(0) == kiir_epoch(dual(g, 0.5), y).alpha(0));
}

TEST_CASE("linear-kernel dual iterations match the primal ones at every epoch") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto data = test::gaussian_data(rng, 2 + trial % 25, 1 + trial % 7);
    const Matrix g = gram_matrix(KernelSpec::linear(), data.inputs());
    const double gamma = 1.0 / kappa_bound(data);
    CHECK(DualState::default_step_size(g) == doctest::Approx(gamma).epsilon(1e-14));
    auto inc = dual(g, gamma), bat = dual(g, gamma);
    IterState p{Vector::Zero(data.d()), 0, gamma}, q = p;
    const Matrix queries = test::gaussian_matrix(rng, 5, data.d());
    for (int t = 1; t <= 20; ++t) {
      inc = kiir_epoch(inc, data.outputs());
      bat = kir_epoch(bat, data.outputs());
      p = epoch_update(p, data);
      q = batch_gd_epoch(q, data);
      const Vector primal = queries * p.w;
      const Vector primal_batch = queries * q.w;
      const Vector dual_pred = predict(KernelSpec::linear(), data.inputs(), inc.alpha, queries);
      const Vector dual_batch = predict(KernelSpec::linear(), data.inputs(), bat.alpha, queries);
      CHECK((dual_pred - primal).norm() <= 1e-10 * (1.0 + primal.norm()));
      CHECK((dual_batch - primal_batch).norm() <= 1e-10 * (1.0 + primal_batch.norm()));
    }
  }
}

TEST_CASE("kernel ridge regression examples") {
  CHECK(krr_fit(Matrix::Ones(1, 1), Vector::Ones(1), 1.0)(0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(krr_fit(Matrix::Ones(1, 1), Vector::Ones(1), 0.0), ContractViolation);
  CHECK_THROWS_AS(krr_fit(Matrix::Ones(1, 1), Vector::Ones(1), -2.0), ContractViolation);

  std::mt19937_64 rng(9);
  const Matrix points = test::gaussian_matrix(rng, 5, 2);
  const Matrix g = gram_matrix(KernelSpec::gaussian(1.0), points);
  const Vector y = test::gaussian_vector(rng, 5);

  const Vector heavy = krr_fit(g, y, 1e6);
  const Vector limit = y / (5.0 * 1e6);
  CHECK((heavy - limit).norm() <= 1e-3 * limit.norm());

  const Vector light = krr_fit(g, y, 1e-10);
  CHECK((g * light - y).norm() <= 1e-6 * (1.0 + y.norm()));
}

TEST_CASE("kernel ridge solution zeroes the penalized gradient") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix points = test::gaussian_matrix(rng, 8, 3);
    const Matrix g = gram_matrix(KernelSpec::gaussian(1.3), points);
    const Vector y = test::gaussian_vector(rng, 8);
    const double lambda = std::pow(10.0, -(trial % 6));
    const Vector alpha = krr_fit(g, y, lambda);
    const Vector gradient = g * ((g + 8.0 * lambda * Matrix::Identity(8, 8)) * alpha - y);
    CHECK(gradient.norm() <= 1e-9 * (1.0 + y.norm()));
  }
}

TEST_CASE("predict examples") {
  std::mt19937_64 rng(12);
  const Matrix points = test::gaussian_matrix(rng, 6, 2);
  const auto kernel = KernelSpec::gaussian(0.8);
  const Vector alpha = test::gaussian_vector(rng, 6);
  CHECK((predict(kernel, points, alpha, points) - gram_matrix(kernel, points) * alpha).norm() <=
        1e-14);
  CHECK(predict(kernel, points, Vector::Zero(6), points).isZero(0.0));
  CHECK_THROWS_AS(predict(kernel, points, Vector::Zero(5), points), ContractViolation);
}

TEST_CASE("classification error examples") {
  Vector labels(3);
  labels << 1, -1, 1;
  CHECK(classification_error(labels, labels) == 0.0);
  CHECK(classification_error(-labels, labels) == 1.0);
  Vector pred(3);
  pred << 0.1, -0.2, 0.3;
  CHECK(classification_error(pred, Vector::Ones(3)) == doctest::Approx(1.0 / 3.0));
  CHECK(classification_error(Vector::Zero(1), Vector::Ones(1)) == 0.0);
  CHECK(classification_error(Vector::Zero(1), -Vector::Ones(1)) == 1.0);
  Vector bad(3);
  bad << 1, 0, -1;
  CHECK_THROWS_AS(classification_error(pred, bad), ContractViolation);
  CHECK_THROWS_AS(classification_error(pred, Vector::Ones(2)), ContractViolation);
}

TEST_CASE("property: Gram matrices are symmetric PSD for every kernel kind") {
  std::mt19937_64 rng(13);
  const KernelSpec kernels[] = {KernelSpec::linear(), KernelSpec::gaussian(0.9),
                                KernelSpec::polynomial(3, 1.0), KernelSpec::trig_dictionary(5)};
  for (const auto& kernel : kernels) {
    for (int trial = 0; trial < 100; ++trial) {
      const Matrix points = test::gaussian_matrix(rng, 2 + trial % 15, 1 + trial % 4);
      const Matrix g = gram_matrix(kernel, points);
      CHECK((g - g.transpose()).norm() == 0.0);
      Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
      const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * top);
    }
  }
}

TEST_CASE("property: the dual epoch map is a contraction in the G-seminorm") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix points = test::gaussian_matrix(rng, 3 + trial % 10, 2);
    const Matrix g = gram_matrix(KernelSpec::gaussian(1.0), points);
    const auto n = g.rows();
    const double gamma = DualState::default_step_size(g);
    // The epoch map is affine; its linear part is the pass with y = 0.
    const Vector zero = Vector::Zero(n);
    for (int probe = 0; probe < 5; ++probe) {
      auto state = dual(g, gamma);
      state.alpha = test::gaussian_vector(rng, n);
      const Vector next = kiir_epoch(state, zero).alpha;
      const double before = state.alpha.dot(g * state.alpha);
      const double after = next.dot(g * next);
      CHECK(after <= before * (1.0 + 1e-12) + 1e-14);
    }
  }
}

TEST_CASE("kernel trainers report dual coefficients and predictions") {
  std::mt19937_64 rng(16);
  const auto data = test::gaussian_data(rng, 10, 2);
  auto trainer = kernel_trainer(KernelSpec::gaussian(1.0), KernelMethod::incremental)(data);
  const Matrix g = gram_matrix(KernelSpec::gaussian(1.0), data.inputs());
  auto state = dual(g, DualState::default_step_size(g));
  for (int t = 0; t < 3; ++t) {
    trainer->advance();
    state = kiir_epoch(state, data.outputs());
  }
  CHECK(trainer->epoch() == 3);
  CHECK((trainer->coefficients() - state.alpha).norm() <= 1e-14);
  CHECK((trainer->predict(data.inputs()) - g * state.alpha).norm() <= 1e-12);
}
