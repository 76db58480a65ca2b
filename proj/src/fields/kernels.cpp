#include <algorithm>
#include <cmath>

#include "wpmp/fields.hpp"

namespace wpmp {

namespace {

constexpr double kFdStep = 1e-6;

template <class F>
Matrix central_jacobian(const F& f, const Vector& at, int dim) {
  Matrix jac(dim, at.size());
  Vector probe = at;
  for (Eigen::Index k = 0; k < at.size(); ++k) {
    probe(k) = at(k) + kFdStep;
    const Vector plus = f(probe);
    probe(k) = at(k) - kFdStep;
    const Vector minus = f(probe);
    probe(k) = at(k);
    jac.col(k) = (plus - minus) / (2.0 * kFdStep);
  }
  return jac;
}

class LinearAttraction final : public InteractionKernel {
 public:
  LinearAttraction(int dim, double strength) : InteractionKernel(dim), s_(strength) {}
  std::string id() const override { return "linear_attraction"; }
  Vector eval(double, const Vector& x, const Vector& y) const override { return s_ * (y - x); }
  Matrix jac_x(double, const Vector&, const Vector&) const override {
    return -s_ * Matrix::Identity(dim(), dim());
  }
  Matrix jac_y(double, const Vector&, const Vector&) const override {
    return s_ * Matrix::Identity(dim(), dim());
  }
  KernelBounds bounds() const override {
    const double a = std::abs(s_);
    return {a, a, a};
  }
  Matrix velocities(double, const Matrix& support, const Vector& weights, const Matrix& at) const override {
    const Eigen::RowVectorXd mean = weights.transpose() * support;
    return -s_ * (at.rowwise() - mean);
  }

 private:
  double s_;
};

// H = K (y - x) / (1 + |y - x|^2)^beta
class CuckerSmale final : public InteractionKernel {
 public:
  CuckerSmale(int dim, double strength, double beta) : InteractionKernel(dim), k_(strength), beta_(beta) {
    if (beta < 0.0) throw InvalidArgument("cucker_smale: beta must be nonnegative");
  }
  std::string id() const override { return "cucker_smale"; }
  Vector eval(double, const Vector& x, const Vector& y) const override {
    const Vector z = y - x;
    return k_ * std::pow(1.0 + z.squaredNorm(), -beta_) * z;
  }
  Matrix jac_x(double t, const Vector& x, const Vector& y) const override { return -jac_y(t, x, y); }
  Matrix jac_y(double, const Vector& x, const Vector& y) const override {
    const Vector z = y - x;
    const double q = 1.0 + z.squaredNorm();
    const double a = std::pow(q, -beta_);
    return k_ * (a * Matrix::Identity(dim(), dim()) - (2.0 * beta_ * a / q) * z * z.transpose());
  }
  KernelBounds bounds() const override {
    const double lip = std::abs(k_) * std::max(1.0, std::abs(1.0 - 2.0 * beta_));
    return {std::abs(k_), lip, lip};
  }

 private:
  double k_;
  double beta_;
};

class ZeroKernel final : public InteractionKernel {
 public:
  explicit ZeroKernel(int dim) : InteractionKernel(dim) {}
  std::string id() const override { return "zero"; }
  Vector eval(double, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Matrix jac_x(double, const Vector&, const Vector&) const override { return Matrix::Zero(dim(), dim()); }
  Matrix jac_y(double, const Vector&, const Vector&) const override { return Matrix::Zero(dim(), dim()); }
  KernelBounds bounds() const override { return {}; }
  bool is_zero() const override { return true; }
  Matrix velocities(double, const Matrix&, const Vector&, const Matrix& at) const override {
    return Matrix::Zero(at.rows(), dim());
  }
};

}  // namespace

InteractionKernel::InteractionKernel(int dim) : dim_(dim) {
  if (dim < 1) throw InvalidArgument("InteractionKernel: dimension must be positive");
}

Matrix InteractionKernel::jac_x(double t, const Vector& x, const Vector& y) const {
  return central_jacobian([&](const Vector& p) { return eval(t, p, y); }, x, dim_);
}

Matrix InteractionKernel::jac_y(double t, const Vector& x, const Vector& y) const {
  return central_jacobian([&](const Vector& p) { return eval(t, x, p); }, y, dim_);
}

Matrix InteractionKernel::velocities(double t, const Matrix& support, const Vector& weights,
                                     const Matrix& at) const {
  Matrix out = Matrix::Zero(at.rows(), dim_);
  for (Eigen::Index i = 0; i < at.rows(); ++i) {
    const Vector x = at.row(i).transpose();
    for (Eigen::Index j = 0; j < support.rows(); ++j) {
      if (weights(j) == 0.0) continue;
      out.row(i) += weights(j) * eval(t, x, support.row(j).transpose()).transpose();
    }
  }
  return out;
}

KernelPtr make_kernel(const std::string& id, int dim, const Params& params) {
  if (id == "linear_attraction") {
    return std::make_shared<LinearAttraction>(dim, params.scalar("strength", 1.0));
  }
  if (id == "cucker_smale") {
    return std::make_shared<CuckerSmale>(dim, params.scalar("strength", 1.0), params.scalar("beta", 1.0));
  }
  if (id == "zero") return std::make_shared<ZeroKernel>(dim);
  throw InvalidArgument("unknown kernel id '" + id + "'");
}

FunctionKernel::FunctionKernel(int dim, std::string id, Eval eval, KernelBounds bounds, Jac jac_x, Jac jac_y)
    : InteractionKernel(dim),
      id_(std::move(id)),
      eval_(std::move(eval)),
      bounds_(bounds),
      jac_x_(std::move(jac_x)),
      jac_y_(std::move(jac_y)) {
  if (!eval_) throw InvalidArgument("FunctionKernel: eval callback is required");
}

Matrix FunctionKernel::jac_x(double t, const Vector& x, const Vector& y) const {
  return jac_x_ ? jac_x_(t, x, y) : InteractionKernel::jac_x(t, x, y);
}

Matrix FunctionKernel::jac_y(double t, const Vector& x, const Vector& y) const {
  return jac_y_ ? jac_y_(t, x, y) : InteractionKernel::jac_y(t, x, y);
}

Vector eval_velocity(const InteractionKernel& kernel, const DiscreteMeasure& mu, double t, const Vector& x) {
  require_dim(kernel.dim(), mu.dim(), "eval_velocity measure");
  require_dim(kernel.dim(), x.size(), "eval_velocity point");
  Vector v = Vector::Zero(kernel.dim());
  for (int j = 0; j < mu.size(); ++j) v += mu.weight(j) * kernel.eval(t, x, mu.point(j));
  return v;
}

Matrix eval_velocity_jacobian(const InteractionKernel& kernel, const DiscreteMeasure& mu, double t,
                              const Vector& x) {
  require_dim(kernel.dim(), mu.dim(), "eval_velocity_jacobian measure");
  require_dim(kernel.dim(), x.size(), "eval_velocity_jacobian point");
  Matrix jac = Matrix::Zero(kernel.dim(), kernel.dim());
  for (int j = 0; j < mu.size(); ++j) jac += mu.weight(j) * kernel.jac_x(t, x, mu.point(j));
  return jac;
}

Matrix eval_gamma(const InteractionKernel& kernel, double t, const Vector& x, const Vector& y) {
  require_dim(kernel.dim(), x.size(), "eval_gamma x");
  require_dim(kernel.dim(), y.size(), "eval_gamma y");
  return kernel.jac_y(t, x, y);
}

}  // namespace wpmp
