#include <algorithm>
#include <cmath>

#include "wpmp/fields.hpp"

namespace wpmp {

namespace {

class ConstantField final : public BasisField {
 public:
  ConstantField(int dim, Vector direction) : BasisField(dim), direction_(std::move(direction)) {}
  std::string id() const override { return "constant"; }
  Vector value(const Vector&) const override { return direction_; }
  Matrix jacobian(const Vector&) const override { return Matrix::Zero(dim(), dim()); }

 private:
  Vector direction_;
};

class IdentityField final : public BasisField {
 public:
  using BasisField::BasisField;
  std::string id() const override { return "identity"; }
  Vector value(const Vector& x) const override { return x; }
  Matrix jacobian(const Vector&) const override { return Matrix::Identity(dim(), dim()); }
};

class RotationField final : public BasisField {
 public:
  using BasisField::BasisField;
  std::string id() const override { return "rotation"; }
  Vector value(const Vector& x) const override { return Eigen::Vector2d(-x(1), x(0)); }
  Matrix jacobian(const Vector&) const override {
    Matrix j(2, 2);
    j << 0.0, -1.0, 1.0, 0.0;
    return j;
  }
};

class TanhField final : public BasisField {
 public:
  using BasisField::BasisField;
  std::string id() const override { return "tanh"; }
  Vector value(const Vector& x) const override { return x.array().tanh().matrix(); }
  Matrix jacobian(const Vector& x) const override {
    const Eigen::ArrayXd th = x.array().tanh();
    return (1.0 - th.square()).matrix().asDiagonal();
  }
};

}  // namespace

BasisFieldPtr make_basis_field(const std::string& id, int dim, const Params& params) {
  if (dim < 1) throw InvalidArgument("basis field: dimension must be positive");
  if (id == "constant") {
    return std::make_shared<ConstantField>(dim, params.vector("direction", dim, Vector::Unit(dim, 0)));
  }
  if (id == "identity") return std::make_shared<IdentityField>(dim);
  if (id == "rotation") {
    if (dim != 2) throw InvalidArgument("basis field 'rotation' requires dimension 2");
    return std::make_shared<RotationField>(dim);
  }
  if (id == "tanh") return std::make_shared<TanhField>(dim);
  throw InvalidArgument("unknown control basis id '" + id + "'");
}

ControlBasis::ControlBasis(int dim, std::vector<BasisFieldPtr> fields) : dim_(dim), fields_(std::move(fields)) {
  for (const auto& f : fields_) {
    if (!f) throw InvalidArgument("ControlBasis: null basis field");
    require_dim(dim_, f->dim(), "ControlBasis field");
  }
}

ControlField::ControlField(BasisPtr basis, Vector coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
  if (!basis_) throw InvalidArgument("ControlField: null basis");
  require_dim(basis_->size(), coefficients_.size(), "ControlField coefficients");
}

ControlField ControlField::zero(BasisPtr basis) {
  const int m = basis->size();
  return ControlField(std::move(basis), Vector::Zero(m));
}

Vector ControlField::value(const Vector& x) const {
  require_dim(dim(), x.size(), "ControlField point");
  Vector u = Vector::Zero(dim());
  for (int k = 0; k < basis_->size(); ++k) {
    if (coefficients_(k) != 0.0) u += coefficients_(k) * basis_->field(k).value(x);
  }
  return u;
}

Matrix ControlField::jacobian(const Vector& x) const {
  require_dim(dim(), x.size(), "ControlField point");
  Matrix j = Matrix::Zero(dim(), dim());
  for (int k = 0; k < basis_->size(); ++k) {
    if (coefficients_(k) != 0.0) j += coefficients_(k) * basis_->field(k).jacobian(x);
  }
  return j;
}

ControlLaw::ControlLaw(BasisPtr basis, double horizon, Matrix coefficients, double bound)
    : basis_(std::move(basis)), horizon_(horizon), coefficients_(std::move(coefficients)), bound_(bound) {
  if (!basis_) throw InvalidArgument("ControlLaw: null basis");
  if (!(horizon_ > 0.0)) throw InvalidArgument("ControlLaw: horizon must be positive");
  if (coefficients_.rows() < 1) throw InvalidArgument("ControlLaw: need at least one time cell");
  require_dim(basis_->size(), coefficients_.cols(), "ControlLaw coefficient columns");
  if (!coefficients_.allFinite()) throw InvalidArgument("ControlLaw: non-finite coefficients");
}

ControlLaw ControlLaw::constant(BasisPtr basis, double horizon, const Vector& coefficients, double bound) {
  return ControlLaw(std::move(basis), horizon, coefficients.transpose(), bound);
}

int ControlLaw::cell_at(double t) const {
  const double slack = 1e-12 * horizon_;
  if (t < -slack || t > horizon_ + slack) {
    throw InvalidArgument("control evaluated at t=" + std::to_string(t) + " outside [0, " +
                          std::to_string(horizon_) + "]");
  }
  double s = t / cell_width();
  const double nearest = std::round(s);
  if (std::abs(s - nearest) < 1e-9) s = nearest;
  const int cell = static_cast<int>(std::ceil(s)) - 1;
  return std::clamp(cell, 0, cells() - 1);
}

ControlField ControlLaw::field_in_cell(int cell) const {
  if (cell < 0 || cell >= cells()) throw InvalidArgument("ControlLaw: cell index out of range");
  return ControlField(basis_, coefficients_.row(cell).transpose());
}

ControlField ControlLaw::field_at(double t) const { return field_in_cell(cell_at(t)); }

Vector ControlLaw::eval(double t, const Vector& x) const { return field_at(t).value(x); }

Matrix ControlLaw::jacobian(double t, const Vector& x) const { return field_at(t).jacobian(x); }

ControlLaw ControlLaw::refined(int cells_new) const {
  if (cells_new < 1 || cells_new % cells() != 0) {
    throw InvalidArgument("ControlLaw::refined: " + std::to_string(cells_new) + " is not a multiple of " +
                          std::to_string(cells()));
  }
  const int factor = cells_new / cells();
  Matrix c(cells_new, coefficients_.cols());
  for (int k = 0; k < cells_new; ++k) c.row(k) = coefficients_.row(k / factor);
  return ControlLaw(basis_, horizon_, std::move(c), bound_);
}

ControlLaw ControlLaw::with_cell(int cell, const Vector& coefficients) const {
  if (cell < 0 || cell >= cells()) throw InvalidArgument("ControlLaw::with_cell: cell index out of range");
  require_dim(coefficients_.cols(), coefficients.size(), "ControlLaw::with_cell coefficients");
  Matrix c = coefficients_;
  c.row(cell) = coefficients.transpose();
  return ControlLaw(basis_, horizon_, std::move(c), bound_);
}

Vector eval_control(const ControlLaw& law, double t, const Vector& x) { return law.eval(t, x); }

Matrix eval_control_jacobian(const ControlLaw& law, double t, const Vector& x) { return law.jacobian(t, x); }

}  // namespace wpmp
