#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "iir/model.hpp"
#include "iir/trainer.hpp"

namespace iir {

/// Positive-definite kernels.
///   linear           <x, x'>
///   gaussian         exp(-||x - x'||^2 / (2 width^2))
///   polynomial       (<x, x'> + offset)^degree
///   trig_dictionary  <Phi(x_0), Phi(x'_0)> with phi_k(s) = cos((k-1)s) + sin((k-1)s),
///                    k = 1..components, evaluated on the first input coordinate
struct KernelSpec {
  enum class Kind { linear, gaussian, polynomial, trig_dictionary };

  Kind kind = Kind::linear;
  double width = 1.0;
  int degree = 2;
  double offset = 1.0;
  int components = 5;

  static KernelSpec linear() { return {}; }
  static KernelSpec gaussian(double width);
  static KernelSpec polynomial(int degree, double offset);
  static KernelSpec trig_dictionary(int components);

  /// Accepts "linear", "gaussian:<width>", "poly:<degree>[,<offset>]", "trig:<components>".
  static KernelSpec parse(const std::string& text);
  std::string to_string() const;

  void validate() const;
  double operator()(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) const;
};

/// G_ij = K(x_i, x_j) over the rows of `points`.
Matrix gram_matrix(const KernelSpec& kernel, const Matrix& points);

/// K_ij = K(a_i, b_j).
Matrix cross_gram(const KernelSpec& kernel, const Matrix& a, const Matrix& b);

/// Dual iterate f = sum_j alpha_j K(x_j, .). The Gram matrix is shared and
/// never mutated.
struct DualState {
  Vector alpha;
  std::shared_ptr<const Matrix> gram;
  std::int64_t epoch = 0;
  double gamma = 1.0;

  static DualState zero(std::shared_ptr<const Matrix> gram, double gamma);
  /// 1 / max_i G_ii
  static double default_step_size(const Matrix& gram);
};

/// Incremental pass: for i = 1..n, alpha_i -= (gamma/n) ((G alpha)_i - y_i),
/// each residual read with the current alpha. O(n^2) per epoch.
DualState kiir_epoch(const DualState& state, const Vector& y);

/// Batch pass: alpha -= (gamma/n) (G alpha - y).
DualState kir_epoch(const DualState& state, const Vector& y);

/// (G + n lambda I)^{-1} y
Vector krr_fit(const Matrix& gram, const Vector& y, double lambda);

Vector predict(const KernelSpec& kernel, const Matrix& train_points, const Vector& alpha,
               const Matrix& query_points);

/// Fraction of sign(prediction) != label, with sign(0) = +1.
double classification_error(const Vector& predictions, const Vector& labels);

enum class KernelMethod { incremental, batch };

TrainerFactory kernel_trainer(const KernelSpec& kernel, KernelMethod method,
                              std::optional<double> gamma = std::nullopt);

}  // namespace iir
