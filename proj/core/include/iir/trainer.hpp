#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "iir/model.hpp"

namespace iir {

/// A learner whose regularization parameter is the number of passes made
/// over its training set. Starts at epoch 0 with a zero predictor.
class EpochTrainer {
 public:
  virtual ~EpochTrainer() = default;

  virtual void advance() = 0;
  virtual std::int64_t epoch() const = 0;
  /// Predictions at the rows of `queries`.
  virtual Vector predict(const Matrix& queries) const = 0;
  /// Primal weights for linear learners, dual coefficients for kernel ones.
  virtual const Vector& coefficients() const = 0;
};

using TrainerFactory = std::function<std::unique_ptr<EpochTrainer>(const DataSet& train)>;

}  // namespace iir
