#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "wpmp/measures.hpp"

namespace wpmp {

/// Declared constants for an interaction kernel H.
///   |H(t,x,y)| <= sublinearity * (1 + |x| + |y|)
///   |D_x v[mu]| <= lipschitz_space,  |v[mu] - v[nu]| <= lipschitz_measure * W1(mu, nu)
struct KernelBounds {
  double sublinearity = 0.0;
  double lipschitz_space = 0.0;
  double lipschitz_measure = 0.0;
};

/// Interaction kernel H(t, x, y) defining v[mu](t, x) = sum_j w_j H(t, x, y_j).
class InteractionKernel {
 public:
  explicit InteractionKernel(int dim);
  virtual ~InteractionKernel() = default;

  int dim() const { return dim_; }
  virtual std::string id() const = 0;
  virtual Vector eval(double t, const Vector& x, const Vector& y) const = 0;
  /// Defaults are central differences with step 1e-6.
  virtual Matrix jac_x(double t, const Vector& x, const Vector& y) const;
  virtual Matrix jac_y(double t, const Vector& x, const Vector& y) const;
  virtual KernelBounds bounds() const = 0;
  virtual bool is_zero() const { return false; }

  /// v[mu](t, .) at every row of `at`; rows of the result are velocities.
  virtual Matrix velocities(double t, const Matrix& support, const Vector& weights, const Matrix& at) const;

 private:
  int dim_;
};

using KernelPtr = std::shared_ptr<const InteractionKernel>;

/// Catalog: "linear_attraction" {strength}, "cucker_smale" {strength, beta}, "zero".
KernelPtr make_kernel(const std::string& id, int dim, const Params& params = {});

/// User kernel from callbacks. Missing Jacobians fall back to finite differences.
class FunctionKernel : public InteractionKernel {
 public:
  using Eval = std::function<Vector(double, const Vector&, const Vector&)>;
  using Jac = std::function<Matrix(double, const Vector&, const Vector&)>;

  FunctionKernel(int dim, std::string id, Eval eval, KernelBounds bounds, Jac jac_x = {}, Jac jac_y = {});

  std::string id() const override { return id_; }
  Vector eval(double t, const Vector& x, const Vector& y) const override { return eval_(t, x, y); }
  Matrix jac_x(double t, const Vector& x, const Vector& y) const override;
  Matrix jac_y(double t, const Vector& x, const Vector& y) const override;
  KernelBounds bounds() const override { return bounds_; }

 private:
  std::string id_;
  Eval eval_;
  KernelBounds bounds_;
  Jac jac_x_;
  Jac jac_y_;
};

Vector eval_velocity(const InteractionKernel& kernel, const DiscreteMeasure& mu, double t, const Vector& x);
Matrix eval_velocity_jacobian(const InteractionKernel& kernel, const DiscreteMeasure& mu, double t, const Vector& x);
/// Gamma^v_{(t,x)}(y) = D_y H(t, x, y).
Matrix eval_gamma(const InteractionKernel& kernel, double t, const Vector& x, const Vector& y);

/// A C^1 vector field X_k on R^d.
class BasisField {
 public:
  explicit BasisField(int dim) : dim_(dim) {}
  virtual ~BasisField() = default;
  int dim() const { return dim_; }
  virtual std::string id() const = 0;
  virtual Vector value(const Vector& x) const = 0;
  virtual Matrix jacobian(const Vector& x) const = 0;

 private:
  int dim_;
};

using BasisFieldPtr = std::shared_ptr<const BasisField>;

/// Catalog: "constant" {direction}, "identity", "rotation" (d = 2), "tanh".
BasisFieldPtr make_basis_field(const std::string& id, int dim, const Params& params = {});

class ControlBasis {
 public:
  ControlBasis(int dim, std::vector<BasisFieldPtr> fields);
  int dim() const { return dim_; }
  int size() const { return static_cast<int>(fields_.size()); }
  const BasisField& field(int k) const { return *fields_[static_cast<std::size_t>(k)]; }

 private:
  int dim_;
  std::vector<BasisFieldPtr> fields_;
};

using BasisPtr = std::shared_ptr<const ControlBasis>;

/// Time-frozen control u(x) = sum_k c_k X_k(x).
class ControlField {
 public:
  ControlField(BasisPtr basis, Vector coefficients);
  static ControlField zero(BasisPtr basis);

  int dim() const { return basis_->dim(); }
  const BasisPtr& basis() const { return basis_; }
  const Vector& coefficients() const { return coefficients_; }
  Vector value(const Vector& x) const;
  Matrix jacobian(const Vector& x) const;

 private:
  BasisPtr basis_;
  Vector coefficients_;
};

/// u(t, x) = sum_k c_k(t) X_k(x) with c piecewise constant on `cells` uniform
/// time cells over [0, T]. A time on a cell boundary belongs to the left cell.
class ControlLaw {
 public:
  /// `coefficients` is cells x m.
  ControlLaw(BasisPtr basis, double horizon, Matrix coefficients, double bound);
  static ControlLaw constant(BasisPtr basis, double horizon, const Vector& coefficients, double bound);

  int dim() const { return basis_->dim(); }
  const BasisPtr& basis() const { return basis_; }
  double horizon() const { return horizon_; }
  int cells() const { return static_cast<int>(coefficients_.rows()); }
  double cell_width() const { return horizon_ / cells(); }
  double bound() const { return bound_; }
  const Matrix& coefficients() const { return coefficients_; }

  int cell_at(double t) const;
  ControlField field_in_cell(int cell) const;
  ControlField field_at(double t) const;
  Vector eval(double t, const Vector& x) const;
  Matrix jacobian(double t, const Vector& x) const;

  /// Same law on `cells` cells; must be a multiple of the current count.
  ControlLaw refined(int cells) const;
  ControlLaw with_cell(int cell, const Vector& coefficients) const;

 private:
  BasisPtr basis_;
  double horizon_;
  Matrix coefficients_;
  double bound_;
};

Vector eval_control(const ControlLaw& law, double t, const Vector& x);
Matrix eval_control_jacobian(const ControlLaw& law, double t, const Vector& x);

struct HypothesisReport {
  int samples = 0;
  double radius = 0.0;
  /// sup |H(t,x,y)| / (1 + |x|) over sampled x, y in the ball.
  double estimated_sublinearity = 0.0;
  /// Declared constant converted to the same form: M (1 + radius).
  double declared_sublinearity = 0.0;
  double estimated_lipschitz_space = 0.0;
  double estimated_lipschitz_measure = 0.0;
  KernelBounds declared;
  /// max over cells of sup|u| + sup|Du| on the sampled points.
  double estimated_control_bound = 0.0;
  double declared_control_bound = 0.0;
  /// Worst |fd - analytic| / (1 + |analytic|) for jac_x and jac_y.
  double jacobian_error = 0.0;
  bool control_ok = true;
  bool velocity_ok = true;
  bool jacobians_ok = true;
  std::vector<std::string> violations;
  std::string limitation;

  bool ok() const { return control_ok && velocity_ok && jacobians_ok; }
};

HypothesisReport check_hypotheses(const InteractionKernel& kernel, const ControlLaw& law, double radius,
                                  int samples, std::uint64_t seed = 0);

}  // namespace wpmp
