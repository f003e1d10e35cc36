#include "iir/linear.hpp"

#include <cmath>
#include <string>

#include "iir/error.hpp"

namespace iir {

namespace {

constexpr double kStepSlack = 1e-12;

void require_state(const IterState& state, Eigen::Index d, const char* where) {
  detail::require(state.w.size() == d, std::string(where) + ": dimension mismatch");
  detail::require(state.gamma > 0.0 && std::isfinite(state.gamma),
                  std::string(where) + ": step size must be positive");
}

// (I - T_hi) ... (I - T_lo), 1-based inclusive; identity when lo > hi.
Matrix ordered_product(std::span<const Matrix> ops, std::size_t lo, std::size_t hi) {
  const auto dim = ops.front().rows();
  Matrix p = Matrix::Identity(dim, dim);
  for (std::size_t i = lo; i <= hi; ++i) {
    p = (Matrix::Identity(dim, dim) - ops[i - 1]) * p;
  }
  return p;
}

void require_square_family(std::span<const Matrix> ops) {
  detail::require(!ops.empty(), "decomposition: need at least one operator");
  const auto dim = ops.front().rows();
  for (const auto& t : ops) {
    detail::require(t.rows() == dim && t.cols() == dim,
                    "decomposition: operators must be square and of equal size");
  }
}

class LinearTrainer final : public EpochTrainer {
 public:
  LinearTrainer(const DataSet& train, LinearMethod method, double gamma)
      : train_(train), method_(method) {
    state_.w = Vector::Zero(train.d());
    state_.gamma = gamma;
  }

  void advance() override {
    state_ = method_ == LinearMethod::incremental ? epoch_update(state_, train_)
                                                  : batch_gd_epoch(state_, train_);
  }
  std::int64_t epoch() const override { return state_.epoch; }
  Vector predict(const Matrix& queries) const override {
    detail::require(queries.cols() == state_.w.size(), "predict: dimension mismatch");
    return queries * state_.w;
  }
  const Vector& coefficients() const override { return state_.w; }

 private:
  DataSet train_;
  LinearMethod method_;
  IterState state_;
};

}  // namespace

double default_step_size(const DataSet& data) { return 1.0 / kappa_bound(data); }

void check_step_size(double gamma, double kappa, Eigen::Index n, StepRange range) {
  detail::require(gamma > 0.0 && std::isfinite(gamma), "step size must be positive");
  detail::require(kappa > 0.0, "kappa must be positive");
  const double limit =
      range == StepRange::theorem ? 1.0 / kappa : static_cast<double>(n) / kappa;
  if (gamma > limit * (1.0 + kStepSlack)) {
    throw ContractViolation("step size " + std::to_string(gamma) + " exceeds " +
                            (range == StepRange::theorem ? "1/kappa" : "n/kappa") + " = " +
                            std::to_string(limit));
  }
}

IterState epoch_update(const IterState& state, const DataSet& data) {
  require_state(state, data.d(), "epoch_update");
  const double eta = state.gamma / static_cast<double>(data.n());
  IterState next{state.w, state.epoch + 1, state.gamma};
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double residual = data.x(i).dot(next.w) - data.y(i);
    next.w.noalias() -= (eta * residual) * data.x(i).transpose();
  }
  return next;
}

Vector EpochMap::apply(const Vector& w) const {
  detail::require(w.size() == contraction.cols(), "EpochMap::apply: dimension mismatch");
  return contraction * w + offset;
}

Vector EpochMap::fixed_point() const {
  const auto d = contraction.rows();
  return (Matrix::Identity(d, d) - contraction).partialPivLu().solve(offset);
}

EpochMap build_epoch_map(const DataSet& data, double gamma) {
  detail::require(gamma > 0.0 && std::isfinite(gamma),
                  "build_epoch_map: step size must be positive");
  const auto n = data.n();
  const auto d = data.d();
  const double eta = gamma / static_cast<double>(n);

  // Forward recursions for the sums over k = 2..n:
  //   R_k = (I - eta T_k) R_{k-1} + T_k C_{k-1},  r_k likewise with c_{k-1},
  // where C_{k-1} = sum_{j<k} T_j and c_{k-1} = sum_{j<k} x_j y_j.
  Matrix R = Matrix::Zero(d, d);
  Vector r = Vector::Zero(d);
  Matrix C = Matrix::Zero(d, d);
  Vector c = Vector::Zero(d);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vector x = data.x(k).transpose();
    if (k > 0) {
      R.noalias() -= eta * x * (x.transpose() * R);
      R.noalias() += x * (x.transpose() * C);
      r -= (eta * x.dot(r)) * x;
      r += x.dot(c) * x;
    }
    C.noalias() += x * x.transpose();
    c += data.y(k) * x;
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  EpochMap map;
  map.T_hat = C * inv_n;
  map.A_hat = R * (inv_n * inv_n);
  map.b_hat = r * (inv_n * inv_n);
  map.contraction = Matrix::Identity(d, d) - gamma * map.T_hat + gamma * gamma * map.A_hat;
  map.offset = gamma * inv_n * c - gamma * gamma * map.b_hat;
  return map;
}

Matrix cyclic_product(const DataSet& data, double gamma) {
  const double eta = gamma / static_cast<double>(data.n());
  const auto d = data.d();
  Matrix p = Matrix::Identity(d, d);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Vector x = data.x(i).transpose();
    p.noalias() -= eta * x * (x.transpose() * p);
  }
  return p;
}

PopulationEpochTerms population_epoch_terms(const PopulationOperators& ops, double gamma,
                                            Eigen::Index n) {
  detail::require(n >= 1, "population_epoch_terms: n must be >= 1");
  const auto d = ops.T.rows();
  const double eta = gamma / static_cast<double>(n);
  const Matrix step = Matrix::Identity(d, d) - eta * ops.T;
  const Matrix TT = ops.T * ops.T;
  const Vector Th = ops.T * ops.h;
  Matrix R = Matrix::Zero(d, d);
  Vector r = Vector::Zero(d);
  for (Eigen::Index k = 2; k <= n; ++k) {
    const double before = static_cast<double>(k - 1);
    R = step * R + before * TT;
    r = step * r + before * Th;
  }
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  return {R * scale, r * scale};
}

IterState population_epoch_update(const IterState& state, const PopulationOperators& ops,
                                  Eigen::Index n) {
  require_state(state, ops.T.rows(), "population_epoch_update");
  detail::require(n >= 1, "population_epoch_update: n must be >= 1");
  const double eta = state.gamma / static_cast<double>(n);
  IterState next{state.w, state.epoch + 1, state.gamma};
  for (Eigen::Index i = 0; i < n; ++i) {
    next.w -= eta * (ops.T * next.w - ops.h);
  }
  return next;
}

IterState population_epoch_update(const IterState& state, const DiscreteDistribution& dist,
                                  Eigen::Index n) {
  return population_epoch_update(state, population_operators(dist), n);
}

IterState batch_gd_epoch(const IterState& state, const DataSet& data) {
  require_state(state, data.d(), "batch_gd_epoch");
  const Vector residual = data.inputs() * state.w - data.outputs();
  const Vector gradient = data.inputs().transpose() * residual / static_cast<double>(data.n());
  return {state.w - state.gamma * gradient, state.epoch + 1, state.gamma};
}

ProductDecomposition product_decomposition_check(std::span<const Matrix> operators) {
  require_square_family(operators);
  const auto n = operators.size();
  const auto dim = operators.front().rows();

  ProductDecomposition out;
  out.lhs = ordered_product(operators, 1, n);
  out.rhs = Matrix::Identity(dim, dim);
  Matrix prefix = Matrix::Zero(dim, dim);
  for (std::size_t k = 1; k <= n; ++k) {
    if (k >= 2) {
      out.rhs += ordered_product(operators, k + 1, n) * operators[k - 1] * prefix;
    }
    prefix += operators[k - 1];
  }
  out.rhs -= prefix;
  return out;
}

SumDecomposition sum_decomposition_check(std::span<const Matrix> operators,
                                         std::span<const Vector> vectors) {
  require_square_family(operators);
  detail::require(vectors.size() == operators.size(),
                  "sum decomposition: need one vector per operator");
  const auto n = operators.size();
  const auto dim = operators.front().rows();
  for (const auto& v : vectors) {
    detail::require(v.size() == dim, "sum decomposition: vector dimension mismatch");
  }

  SumDecomposition out{Vector::Zero(dim), Vector::Zero(dim)};
  Vector prefix = Vector::Zero(dim);
  for (std::size_t i = 1; i <= n; ++i) {
    out.lhs += ordered_product(operators, i + 1, n) * vectors[i - 1];
    if (i >= 2) {
      out.rhs -= ordered_product(operators, i + 1, n) * operators[i - 1] * prefix;
    }
    prefix += vectors[i - 1];
  }
  out.rhs += prefix;
  return out;
}

std::vector<IterState> run_iir(const DataSet& data, double gamma, std::int64_t epochs,
                               bool trace, StepRange range) {
  detail::require(epochs >= 0, "run_iir: epochs must be >= 0");
  check_step_size(gamma, kappa_bound(data), data.n(), range);
  std::vector<IterState> out;
  IterState state{Vector::Zero(data.d()), 0, gamma};
  if (trace) {
    out.reserve(static_cast<std::size_t>(epochs) + 1);
    out.push_back(state);
  }
  for (std::int64_t t = 0; t < epochs; ++t) {
    state = epoch_update(state, data);
    if (trace) out.push_back(state);
  }
  if (!trace) out.push_back(std::move(state));
  return out;
}

Vector single_pass_sgd(const DataSet& data, double alpha, std::optional<double> kappa) {
  detail::require(alpha >= 0.0 && alpha < 0.25, "single_pass_sgd: alpha must lie in [0, 1/4)");
  const double k = kappa.value_or(kappa_bound(data));
  detail::require(k > 0.0, "single_pass_sgd: kappa must be positive");
  const double gamma = std::pow(static_cast<double>(data.n()), alpha) / k;
  return run_iir(data, gamma, 1, false, StepRange::lemma).back().w;
}

TrainerFactory linear_trainer(LinearMethod method, std::optional<double> gamma,
                              StepRange range) {
  return [method, gamma, range](const DataSet& train) -> std::unique_ptr<EpochTrainer> {
    const double g = gamma.value_or(default_step_size(train));
    check_step_size(g, kappa_bound(train), train.n(), range);
    return std::make_unique<LinearTrainer>(train, method, g);
  };
}

}  // namespace iir
