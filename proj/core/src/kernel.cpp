#include "iir/kernel.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "iir/error.hpp"
#include "shortest.hpp"

namespace iir {

namespace {

double trig_inner(double s, double t, int components) {
  double sum = 0.0;
  for (int k = 0; k < components; ++k) {
    const double a = std::cos(k * s) + std::sin(k * s);
    const double b = std::cos(k * t) + std::sin(k * t);
    sum += a * b;
  }
  return sum;
}

void require_dual(const DualState& state, const Vector& y, const char* where) {
  detail::require(state.gram != nullptr, std::string(where) + ": missing Gram matrix");
  const auto& g = *state.gram;
  detail::require(g.rows() == g.cols(), std::string(where) + ": Gram matrix must be square");
  detail::require(state.alpha.size() == g.rows() && y.size() == g.rows(),
                  std::string(where) + ": shape mismatch");
  detail::require(state.gamma > 0.0, std::string(where) + ": step size must be positive");
}

class KernelTrainer final : public EpochTrainer {
 public:
  KernelTrainer(const DataSet& train, const KernelSpec& kernel, KernelMethod method,
                std::optional<double> gamma)
      : kernel_(kernel), method_(method), points_(train.inputs()), y_(train.outputs()) {
    auto gram = std::make_shared<const Matrix>(gram_matrix(kernel_, points_));
    state_ = DualState::zero(gram, gamma.value_or(DualState::default_step_size(*gram)));
  }

  void advance() override {
    state_ = method_ == KernelMethod::incremental ? kiir_epoch(state_, y_) : kir_epoch(state_, y_);
  }
  std::int64_t epoch() const override { return state_.epoch; }
  Vector predict(const Matrix& queries) const override {
    return iir::predict(kernel_, points_, state_.alpha, queries);
  }
  const Vector& coefficients() const override { return state_.alpha; }

 private:
  KernelSpec kernel_;
  KernelMethod method_;
  Matrix points_;
  Vector y_;
  DualState state_;
};

}  // namespace

KernelSpec KernelSpec::gaussian(double width) {
  KernelSpec k;
  k.kind = Kind::gaussian;
  k.width = width;
  k.validate();
  return k;
}

KernelSpec KernelSpec::polynomial(int degree, double offset) {
  KernelSpec k;
  k.kind = Kind::polynomial;
  k.degree = degree;
  k.offset = offset;
  k.validate();
  return k;
}

KernelSpec KernelSpec::trig_dictionary(int components) {
  KernelSpec k;
  k.kind = Kind::trig_dictionary;
  k.components = components;
  k.validate();
  return k;
}

KernelSpec KernelSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (name == "linear" && args.empty()) return linear();
    if ((name == "gaussian" || name == "rbf") && !args.empty()) return gaussian(std::stod(args));
    if (name == "poly" || name == "polynomial") {
      const auto comma = args.find(',');
      const int degree = std::stoi(args.substr(0, comma));
      const double offset = comma == std::string::npos ? 1.0 : std::stod(args.substr(comma + 1));
      return polynomial(degree, offset);
    }
    if (name == "trig" && !args.empty()) return trig_dictionary(std::stoi(args));
  } catch (const std::logic_error&) {
    // fall through to the error below
  }
  throw ContractViolation("invalid kernel specification '" + text + "'");
}

std::string KernelSpec::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::linear: out << "linear"; break;
    case Kind::gaussian: out << "gaussian:" << detail::shortest(width); break;
    case Kind::polynomial: out << "poly:" << degree << ',' << detail::shortest(offset); break;
    case Kind::trig_dictionary: out << "trig:" << components; break;
  }
  return out.str();
}

void KernelSpec::validate() const {
  switch (kind) {
    case Kind::linear: break;
    case Kind::gaussian:
      detail::require(width > 0.0 && std::isfinite(width), "gaussian kernel: width must be > 0");
      break;
    case Kind::polynomial:
      detail::require(degree >= 1, "polynomial kernel: degree must be >= 1");
      detail::require(offset >= 0.0 && std::isfinite(offset),
                      "polynomial kernel: offset must be >= 0");
      break;
    case Kind::trig_dictionary:
      detail::require(components >= 1, "trig kernel: need at least one component");
      break;
  }
}

double KernelSpec::operator()(const Eigen::Ref<const Vector>& a,
                              const Eigen::Ref<const Vector>& b) const {
  switch (kind) {
    case Kind::linear: return a.dot(b);
    case Kind::gaussian: return std::exp(-(a - b).squaredNorm() / (2.0 * width * width));
    case Kind::polynomial: return std::pow(a.dot(b) + offset, degree);
    case Kind::trig_dictionary: return trig_inner(a(0), b(0), components);
  }
  return 0.0;
}

Matrix gram_matrix(const KernelSpec& kernel, const Matrix& points) {
  kernel.validate();
  detail::require(points.rows() >= 1, "gram_matrix: no points");
  const auto n = points.rows();
  if (kernel.kind == KernelSpec::Kind::linear) return points * points.transpose();
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector xi = points.row(i).transpose();
    for (Eigen::Index j = i; j < n; ++j) {
      g(i, j) = kernel(xi, points.row(j).transpose());
      g(j, i) = g(i, j);
    }
  }
  return g;
}

Matrix cross_gram(const KernelSpec& kernel, const Matrix& a, const Matrix& b) {
  kernel.validate();
  detail::require(a.cols() == b.cols(), "cross_gram: dimension mismatch");
  if (kernel.kind == KernelSpec::Kind::linear) return a * b.transpose();
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Vector ai = a.row(i).transpose();
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = kernel(ai, b.row(j).transpose());
  }
  return k;
}

DualState DualState::zero(std::shared_ptr<const Matrix> gram, double gamma) {
  detail::require(gram != nullptr, "DualState: missing Gram matrix");
  DualState s;
  s.alpha = Vector::Zero(gram->rows());
  s.gram = std::move(gram);
  s.gamma = gamma;
  return s;
}

double DualState::default_step_size(const Matrix& gram) {
  const double k = gram.diagonal().maxCoeff();
  detail::require(k > 0.0, "DualState: Gram diagonal is not positive");
  return 1.0 / k;
}

DualState kiir_epoch(const DualState& state, const Vector& y) {
  require_dual(state, y, "kiir_epoch");
  const auto& g = *state.gram;
  const auto n = g.rows();
  const double eta = state.gamma / static_cast<double>(n);
  DualState next = state;
  ++next.epoch;
  for (Eigen::Index i = 0; i < n; ++i) {
    // G is symmetric: column i is contiguous in column-major storage.
    const double residual = g.col(i).dot(next.alpha) - y(i);
    next.alpha(i) -= eta * residual;
  }
  return next;
}

DualState kir_epoch(const DualState& state, const Vector& y) {
  require_dual(state, y, "kir_epoch");
  const auto& g = *state.gram;
  DualState next = state;
  ++next.epoch;
  next.alpha -= (state.gamma / static_cast<double>(g.rows())) * (g * state.alpha - y);
  return next;
}

Vector krr_fit(const Matrix& gram, const Vector& y, double lambda) {
  detail::require(lambda > 0.0 && std::isfinite(lambda), "krr_fit: lambda must be > 0");
  detail::require(gram.rows() == gram.cols() && gram.rows() == y.size(),
                  "krr_fit: shape mismatch");
  const auto n = gram.rows();
  Matrix system = gram;
  system.diagonal().array() += static_cast<double>(n) * lambda;
  Eigen::LDLT<Matrix> ldlt(system);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) return ldlt.solve(y);
  return system.partialPivLu().solve(y);
}

Vector predict(const KernelSpec& kernel, const Matrix& train_points, const Vector& alpha,
               const Matrix& query_points) {
  detail::require(alpha.size() == train_points.rows(),
                  "predict: alpha length must equal the number of training points");
  return cross_gram(kernel, query_points, train_points) * alpha;
}

double classification_error(const Vector& predictions, const Vector& labels) {
  detail::require(predictions.size() == labels.size(),
                  "classification_error: length mismatch");
  detail::require(labels.size() >= 1, "classification_error: empty input");
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    detail::require(labels(i) == 1.0 || labels(i) == -1.0,
                    "classification_error: labels must be -1 or +1");
    const double sign = predictions(i) >= 0.0 ? 1.0 : -1.0;
    if (sign != labels(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

TrainerFactory kernel_trainer(const KernelSpec& kernel, KernelMethod method,
                              std::optional<double> gamma) {
  kernel.validate();
  return [kernel, method, gamma](const DataSet& train) -> std::unique_ptr<EpochTrainer> {
    return std::make_unique<KernelTrainer>(train, kernel, method, gamma);
  };
}

}  // namespace iir
