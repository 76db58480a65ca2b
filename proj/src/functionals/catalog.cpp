#include <cmath>

#include "wpmp/functionals.hpp"

namespace wpmp {

namespace {

using Slots = std::vector<Vector>;

// ---- moment maps ----

class ZeroMoment final : public MomentMap {
 public:
  explicit ZeroMoment(int dim) : MomentMap(dim, 1) {}
  std::string id() const override { return "zero"; }
  Vector value(const Vector&) const override { return Vector::Zero(1); }
  Matrix jacobian(const Vector&) const override { return Matrix::Zero(1, dim()); }
  Matrix hessian(const Vector&, int) const override { return Matrix::Zero(dim(), dim()); }
};

class IdentityMoment final : public MomentMap {
 public:
  explicit IdentityMoment(int dim) : MomentMap(dim, dim) {}
  std::string id() const override { return "identity"; }
  Vector value(const Vector& x) const override { return x; }
  Matrix jacobian(const Vector&) const override { return Matrix::Identity(dim(), dim()); }
  Matrix hessian(const Vector&, int) const override { return Matrix::Zero(dim(), dim()); }
};

class SquareNormMoment final : public MomentMap {
 public:
  explicit SquareNormMoment(int dim) : MomentMap(dim, 1) {}
  std::string id() const override { return "square_norm"; }
  Vector value(const Vector& x) const override { return Vector::Constant(1, x.squaredNorm()); }
  Matrix jacobian(const Vector& x) const override { return 2.0 * x.transpose(); }
  Matrix hessian(const Vector&, int) const override { return 2.0 * Matrix::Identity(dim(), dim()); }
};

// exp(-|x - c|^2 / (2 sigma^2))
class GaussianBumpMoment final : public MomentMap {
 public:
  GaussianBumpMoment(int dim, Vector center, double sigma)
      : MomentMap(dim, 1), center_(std::move(center)), s2_(sigma * sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("gaussian_bump: sigma must be positive");
  }
  std::string id() const override { return "gaussian_bump"; }
  Vector value(const Vector& x) const override { return Vector::Constant(1, bump(x)); }
  Matrix jacobian(const Vector& x) const override { return (-bump(x) / s2_) * (x - center_).transpose(); }
  Matrix hessian(const Vector& x, int) const override {
    const Vector z = x - center_;
    return (bump(x) / s2_) * (z * z.transpose() / s2_ - Matrix::Identity(dim(), dim()));
  }

 private:
  double bump(const Vector& x) const { return std::exp(-0.5 * (x - center_).squaredNorm() / s2_); }
  Vector center_;
  double s2_;
};

class SinMoment final : public MomentMap {
 public:
  explicit SinMoment(int dim) : MomentMap(dim, dim) {}
  std::string id() const override { return "sin"; }
  Vector value(const Vector& x) const override { return x.array().sin().matrix(); }
  Matrix jacobian(const Vector& x) const override { return x.array().cos().matrix().asDiagonal(); }
  Matrix hessian(const Vector& x, int k) const override {
    Matrix h = Matrix::Zero(dim(), dim());
    h(k, k) = -std::sin(x(k));
    return h;
  }
};

// ---- running integrands ----

class ControlEnergy final : public RunningIntegrand {
 public:
  ControlEnergy(int dim, int k, double scale) : RunningIntegrand(dim, k), scale_(scale) {}
  std::string id() const override { return "control_energy"; }
  double value(double, const Vector&, const Vector& v, const Vector&) const override {
    return 0.5 * scale_ * v.squaredNorm();
  }
  Vector grad_x(double, const Vector&, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Vector grad_v(double, const Vector&, const Vector& v, const Vector&) const override { return scale_ * v; }
  Vector grad_r(double, const Vector&, const Vector&, const Vector&) const override {
    return Vector::Zero(moment_dim());
  }

 private:
  double scale_;
};

class LinearState final : public RunningIntegrand {
 public:
  LinearState(int dim, int k, Vector slope) : RunningIntegrand(dim, k), slope_(std::move(slope)) {}
  std::string id() const override { return "linear_state"; }
  double value(double, const Vector& x, const Vector&, const Vector&) const override { return slope_.dot(x); }
  Vector grad_x(double, const Vector&, const Vector&, const Vector&) const override { return slope_; }
  Vector grad_v(double, const Vector&, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Vector grad_r(double, const Vector&, const Vector&, const Vector&) const override {
    return Vector::Zero(moment_dim());
  }

 private:
  Vector slope_;
};

class MomentSum final : public RunningIntegrand {
 public:
  using RunningIntegrand::RunningIntegrand;
  std::string id() const override { return "moment_sum"; }
  double value(double, const Vector&, const Vector&, const Vector& r) const override { return r.sum(); }
  Vector grad_x(double, const Vector&, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Vector grad_v(double, const Vector&, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Vector grad_r(double, const Vector&, const Vector&, const Vector&) const override {
    return Vector::Ones(moment_dim());
  }
};

class MeanTracking final : public RunningIntegrand {
 public:
  MeanTracking(int dim, int k, Vector target) : RunningIntegrand(dim, k), target_(std::move(target)) {}
  std::string id() const override { return "mean_tracking"; }
  double value(double, const Vector&, const Vector&, const Vector& r) const override {
    return 0.5 * (r - target_).squaredNorm();
  }
  Vector grad_x(double, const Vector&, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Vector grad_v(double, const Vector&, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Vector grad_r(double, const Vector&, const Vector&, const Vector& r) const override { return r - target_; }

 private:
  Vector target_;
};

class Congestion final : public RunningIntegrand {
 public:
  Congestion(int dim, int k, double rho) : RunningIntegrand(dim, k), rho_(rho) {}
  std::string id() const override { return "congestion"; }
  double value(double, const Vector&, const Vector& v, const Vector& r) const override {
    return 0.5 * v.squaredNorm() * (1.0 + rho_ * r.sum());
  }
  Vector grad_x(double, const Vector&, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Vector grad_v(double, const Vector&, const Vector& v, const Vector& r) const override {
    return (1.0 + rho_ * r.sum()) * v;
  }
  Vector grad_r(double, const Vector&, const Vector& v, const Vector&) const override {
    return Vector::Constant(moment_dim(), 0.5 * rho_ * v.squaredNorm());
  }

 private:
  double rho_;
};

class StateEnergy final : public RunningIntegrand {
 public:
  StateEnergy(int dim, int k, double weight, Vector center)
      : RunningIntegrand(dim, k), weight_(weight), center_(std::move(center)) {}
  std::string id() const override { return "state_energy"; }
  double value(double, const Vector& x, const Vector&, const Vector&) const override {
    return 0.5 * weight_ * (x - center_).squaredNorm();
  }
  Vector grad_x(double, const Vector& x, const Vector&, const Vector&) const override {
    return weight_ * (x - center_);
  }
  Vector grad_v(double, const Vector&, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Vector grad_r(double, const Vector&, const Vector&, const Vector&) const override {
    return Vector::Zero(moment_dim());
  }

 private:
  double weight_;
  Vector center_;
};

// ---- constraint integrands ----

class AffineConstraint final : public ConstraintIntegrand {
 public:
  AffineConstraint(int dim, int k, Vector slope, double beta, double offset, Vector moment_slope)
      : ConstraintIntegrand(dim, k),
        a_(std::move(slope)),
        beta_(beta),
        offset_(offset),
        b_(std::move(moment_slope)) {}
  std::string id() const override { return "affine"; }
  double value(double t, const Vector& x, const Vector& r) const override {
    return a_.dot(x) + beta_ * t + offset_ + b_.dot(r);
  }
  double d_t(double, const Vector&, const Vector&) const override { return beta_; }
  Vector d_x(double, const Vector&, const Vector&) const override { return a_; }
  Vector d_r(double, const Vector&, const Vector&) const override { return b_; }
  Vector d_tx(double, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Vector d_tr(double, const Vector&, const Vector&) const override { return Vector::Zero(moment_dim()); }
  Matrix d_xx(double, const Vector&, const Vector&) const override { return Matrix::Zero(dim(), dim()); }
  Matrix d_xr(double, const Vector&, const Vector&) const override { return Matrix::Zero(dim(), moment_dim()); }
  Matrix d_rr(double, const Vector&, const Vector&) const override {
    return Matrix::Zero(moment_dim(), moment_dim());
  }

 private:
  Vector a_;
  double beta_;
  double offset_;
  Vector b_;
};

class HalfSqNormConstraint final : public ConstraintIntegrand {
 public:
  HalfSqNormConstraint(int dim, int k, Vector center, double radius)
      : ConstraintIntegrand(dim, k), c_(std::move(center)), radius_(radius) {}
  std::string id() const override { return "half_sq_norm"; }
  double value(double, const Vector& x, const Vector&) const override {
    return 0.5 * (x - c_).squaredNorm() - 0.5 * radius_ * radius_;
  }
  double d_t(double, const Vector&, const Vector&) const override { return 0.0; }
  Vector d_x(double, const Vector& x, const Vector&) const override { return x - c_; }
  Vector d_r(double, const Vector&, const Vector&) const override { return Vector::Zero(moment_dim()); }
  Vector d_tx(double, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Vector d_tr(double, const Vector&, const Vector&) const override { return Vector::Zero(moment_dim()); }
  Matrix d_xx(double, const Vector&, const Vector&) const override { return Matrix::Identity(dim(), dim()); }
  Matrix d_xr(double, const Vector&, const Vector&) const override { return Matrix::Zero(dim(), moment_dim()); }
  Matrix d_rr(double, const Vector&, const Vector&) const override {
    return Matrix::Zero(moment_dim(), moment_dim());
  }

 private:
  Vector c_;
  double radius_;
};

// (1 + alpha t)<x, r> + kappa/2 |r|^2 + sin(t)/2 |x|^2
class MeanCouplingConstraint final : public ConstraintIntegrand {
 public:
  MeanCouplingConstraint(int dim, int k, double alpha, double kappa)
      : ConstraintIntegrand(dim, k), alpha_(alpha), kappa_(kappa) {
    if (k != dim) throw DimensionError("mean_coupling constraint needs a moment map with k = d");
  }
  std::string id() const override { return "mean_coupling"; }
  double value(double t, const Vector& x, const Vector& r) const override {
    return (1.0 + alpha_ * t) * x.dot(r) + 0.5 * kappa_ * r.squaredNorm() + 0.5 * std::sin(t) * x.squaredNorm();
  }
  double d_t(double t, const Vector& x, const Vector& r) const override {
    return alpha_ * x.dot(r) + 0.5 * std::cos(t) * x.squaredNorm();
  }
  Vector d_x(double t, const Vector& x, const Vector& r) const override {
    return (1.0 + alpha_ * t) * r + std::sin(t) * x;
  }
  Vector d_r(double t, const Vector& x, const Vector& r) const override {
    return (1.0 + alpha_ * t) * x + kappa_ * r;
  }
  Vector d_tx(double t, const Vector& x, const Vector& r) const override { return alpha_ * r + std::cos(t) * x; }
  Vector d_tr(double, const Vector& x, const Vector&) const override { return alpha_ * x; }
  Matrix d_xx(double t, const Vector&, const Vector&) const override {
    return std::sin(t) * Matrix::Identity(dim(), dim());
  }
  Matrix d_xr(double t, const Vector&, const Vector&) const override {
    return (1.0 + alpha_ * t) * Matrix::Identity(dim(), dim());
  }
  Matrix d_rr(double, const Vector&, const Vector&) const override {
    return kappa_ * Matrix::Identity(dim(), dim());
  }

 private:
  double alpha_;
  double kappa_;
};

class MomentThresholdConstraint final : public ConstraintIntegrand {
 public:
  MomentThresholdConstraint(int dim, int k, double level) : ConstraintIntegrand(dim, k), level_(level) {}
  std::string id() const override { return "moment_threshold"; }
  double value(double, const Vector&, const Vector& r) const override {
    return 0.5 * r.squaredNorm() - 0.5 * level_ * level_;
  }
  double d_t(double, const Vector&, const Vector&) const override { return 0.0; }
  Vector d_x(double, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Vector d_r(double, const Vector&, const Vector& r) const override { return r; }
  Vector d_tx(double, const Vector&, const Vector&) const override { return Vector::Zero(dim()); }
  Vector d_tr(double, const Vector&, const Vector&) const override { return Vector::Zero(moment_dim()); }
  Matrix d_xx(double, const Vector&, const Vector&) const override { return Matrix::Zero(dim(), dim()); }
  Matrix d_xr(double, const Vector&, const Vector&) const override { return Matrix::Zero(dim(), moment_dim()); }
  Matrix d_rr(double, const Vector&, const Vector&) const override {
    return Matrix::Identity(moment_dim(), moment_dim());
  }

 private:
  double level_;
};

}  // namespace

Potential make_potential(const std::string& id, int dim, const Params& params) {
  Potential p;
  p.id = id;
  p.dim = dim;
  if (id == "half_sq_norm") {
    const Vector c = params.vector("center", dim, Vector::Zero(dim));
    p.arity = 1;
    p.value = [c](const Slots& s) { return 0.5 * (s[0] - c).squaredNorm(); };
    p.gradient = [c](const Slots& s, int) -> Vector { return s[0] - c; };
  } else if (id == "linear") {
    const Vector a = params.vector("slope", dim, Vector::Ones(dim));
    p.arity = 1;
    p.value = [a](const Slots& s) { return a.dot(s[0]); };
    p.gradient = [a](const Slots&, int) -> Vector { return a; };
  } else if (id == "fixture_wrong_gradient") {
    p.arity = 1;
    p.value = [](const Slots& s) { return 0.5 * s[0].squaredNorm(); };
    p.gradient = [](const Slots& s, int) -> Vector { return 1.1 * s[0]; };
  } else if (id == "half_sq_dist") {
    p.arity = 2;
    p.value = [](const Slots& s) { return 0.5 * (s[0] - s[1]).squaredNorm(); };
    p.gradient = [](const Slots& s, int slot) -> Vector { return slot == 0 ? s[0] - s[1] : s[1] - s[0]; };
  } else if (id == "gaussian_interaction") {
    const double sigma = params.scalar("sigma", 1.0);
    if (!(sigma > 0.0)) throw InvalidArgument("gaussian_interaction: sigma must be positive");
    const double s2 = sigma * sigma;
    p.arity = 2;
    p.value = [s2](const Slots& s) { return std::exp(-0.5 * (s[0] - s[1]).squaredNorm() / s2); };
    p.gradient = [s2](const Slots& s, int slot) -> Vector {
      const Vector z = s[0] - s[1];
      const Vector g = (-std::exp(-0.5 * z.squaredNorm() / s2) / s2) * z;
      return slot == 0 ? g : Vector(-g);
    };
  } else if (id == "three_body") {
    p.arity = 3;
    p.value = [](const Slots& s) { return (s[0] - s[1]).dot(s[1] - s[2]); };
    p.gradient = [](const Slots& s, int slot) -> Vector {
      if (slot == 0) return s[1] - s[2];
      if (slot == 1) return s[0] - 2.0 * s[1] + s[2];
      return s[1] - s[0];
    };
  } else {
    throw InvalidArgument("unknown potential id '" + id + "'");
  }
  return p;
}

MomentPtr make_moment_map(const std::string& id, int dim, const Params& params) {
  if (id == "zero") return std::make_shared<ZeroMoment>(dim);
  if (id == "identity") return std::make_shared<IdentityMoment>(dim);
  if (id == "square_norm") return std::make_shared<SquareNormMoment>(dim);
  if (id == "gaussian_bump") {
    return std::make_shared<GaussianBumpMoment>(dim, params.vector("center", dim, Vector::Zero(dim)),
                                                params.scalar("sigma", 1.0));
  }
  if (id == "sin") return std::make_shared<SinMoment>(dim);
  throw InvalidArgument("unknown moment map id '" + id + "'");
}

RunningIntegrandPtr make_running_integrand(const std::string& id, int dim, int k, const Params& params) {
  if (id == "control_energy") return std::make_shared<ControlEnergy>(dim, k, params.scalar("scale", 1.0));
  if (id == "linear_state") {
    return std::make_shared<LinearState>(dim, k, params.vector("slope", dim, Vector::Ones(dim)));
  }
  if (id == "moment_sum") return std::make_shared<MomentSum>(dim, k);
  if (id == "mean_tracking") {
    return std::make_shared<MeanTracking>(dim, k, params.vector("target", k, Vector::Zero(k)));
  }
  if (id == "congestion") return std::make_shared<Congestion>(dim, k, params.scalar("rho", 1.0));
  if (id == "state_energy") {
    return std::make_shared<StateEnergy>(dim, k, params.scalar("weight", 1.0),
                                         params.vector("center", dim, Vector::Zero(dim)));
  }
  throw InvalidArgument("unknown running cost id '" + id + "'");
}

ConstraintIntegrandPtr make_constraint_integrand(const std::string& id, int dim, int k, const Params& params) {
  if (id == "affine") {
    return std::make_shared<AffineConstraint>(dim, k, params.vector("slope", dim, Vector::Zero(dim)),
                                              params.scalar("beta", 0.0), params.scalar("offset", 0.0),
                                              params.vector("moment_slope", k, Vector::Zero(k)));
  }
  if (id == "half_sq_norm") {
    return std::make_shared<HalfSqNormConstraint>(dim, k, params.vector("center", dim, Vector::Zero(dim)),
                                                  params.scalar("radius", 0.0));
  }
  if (id == "mean_coupling") {
    return std::make_shared<MeanCouplingConstraint>(dim, k, params.scalar("alpha", 0.5),
                                                    params.scalar("kappa", 1.0));
  }
  if (id == "moment_threshold") {
    return std::make_shared<MomentThresholdConstraint>(dim, k, params.scalar("level", 1.0));
  }
  throw InvalidArgument("unknown state constraint id '" + id + "'");
}

}  // namespace wpmp
