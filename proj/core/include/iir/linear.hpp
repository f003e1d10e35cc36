#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iir/model.hpp"
#include "iir/trainer.hpp"

namespace iir {

/// Admissible step sizes. `theorem` is gamma in ]0, 1/kappa], where the rate
/// guarantees hold; `lemma` is the looser ]0, n/kappa], enough for the
/// epoch-map algebra and the single-pass schedule.
enum class StepRange { theorem, lemma };

struct IterState {
  Vector w;
  std::int64_t epoch = 0;
  double gamma = 1.0;
};

/// 1/kappa with kappa = max_i ||x_i||^2.
double default_step_size(const DataSet& data);

/// Throws ContractViolation when gamma is outside `range` for (kappa, n).
void check_step_size(double gamma, double kappa, Eigen::Index n, StepRange range);

/// One cyclic pass: u_0 = w, u_i = u_{i-1} - (gamma/n)(<u_{i-1}, x_i> - y_i) x_i
/// for i = 1..n in dataset order; returns u_n with epoch + 1.
IterState epoch_update(const IterState& state, const DataSet& data);

/// One epoch written as an affine map w -> contraction * w + offset, with
///   contraction = I - gamma T^ + gamma^2 A^
///   offset      = gamma (1/n) sum_j x_j y_j - gamma^2 b^.
/// A^ and b^ are accumulated from their defining sums, not from the inner
/// loop, so the map is an independent route to epoch_update.
struct EpochMap {
  Matrix contraction;
  Vector offset;
  Matrix A_hat;
  Vector b_hat;
  Matrix T_hat;

  Vector apply(const Vector& w) const;
  /// (I - contraction)^{-1} offset; requires I - contraction invertible.
  Vector fixed_point() const;
};

EpochMap build_epoch_map(const DataSet& data, double gamma);

/// prod_{i=1}^{n} (I - (gamma/n) x_i x_i^T), factor i = n applied last.
Matrix cyclic_product(const DataSet& data, double gamma);

/// Population counterparts A and b of A^ and b^ (every T_{x_i} replaced by T,
/// every x_j y_j by S* g).
struct PopulationEpochTerms {
  Matrix A;
  Vector b;
};

PopulationEpochTerms population_epoch_terms(const PopulationOperators& ops, double gamma,
                                            Eigen::Index n);

/// n inner steps u <- u - (gamma/n)(T u - h) on the exact population gradient.
IterState population_epoch_update(const IterState& state, const PopulationOperators& ops,
                                  Eigen::Index n);
IterState population_epoch_update(const IterState& state, const DiscreteDistribution& dist,
                                  Eigen::Index n);

/// One full-gradient step of size gamma on the empirical risk.
IterState batch_gd_epoch(const IterState& state, const DataSet& data);

struct ProductDecomposition {
  Matrix lhs;  // prod_{i=1}^{n} (I - T_i)
  Matrix rhs;  // I - sum_j T_j + sum_{k>=2} [prod_{i>k} (I - T_i)] T_k sum_{j<k} T_j
};

/// Evaluates both sides of the product expansion directly.
ProductDecomposition product_decomposition_check(std::span<const Matrix> operators);

struct SumDecomposition {
  Vector lhs;  // sum_i [prod_{k>i} (I - T_k)] w_i
  Vector rhs;  // sum_i w_i - sum_{k>=2} [prod_{i>k} (I - T_i)] T_k sum_{j<k} w_j
};

SumDecomposition sum_decomposition_check(std::span<const Matrix> operators,
                                         std::span<const Vector> vectors);

/// Runs `epochs` passes from w_0 = 0. With `trace` the result holds
/// w_0..w_epochs, otherwise only the last iterate.
std::vector<IterState> run_iir(const DataSet& data, double gamma, std::int64_t epochs,
                               bool trace = false, StepRange range = StepRange::theorem);

/// One pass with gamma = n^alpha / kappa (inner step n^(alpha-1) / kappa),
/// 0 <= alpha < 1/4. `kappa` defaults to kappa_bound(data).
Vector single_pass_sgd(const DataSet& data, double alpha,
                       std::optional<double> kappa = std::nullopt);

enum class LinearMethod { incremental, batch };

/// Trainer running epoch_update (incremental) or batch_gd_epoch (batch).
/// Without an explicit gamma the default 1/kappa of the training set is used.
TrainerFactory linear_trainer(LinearMethod method, std::optional<double> gamma = std::nullopt,
                              StepRange range = StepRange::theorem);

}  // namespace iir
