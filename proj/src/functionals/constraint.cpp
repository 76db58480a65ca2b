#include "wpmp/functionals.hpp"

namespace wpmp {

StateConstraint::StateConstraint(std::string name, ConstraintIntegrandPtr integrand, MomentPtr moment)
    : name_(std::move(name)), integrand_(std::move(integrand)), moment_(std::move(moment)) {
  if (!integrand_ || !moment_) throw InvalidArgument("StateConstraint: integrand and moment map are required");
  require_dim(integrand_->dim(), moment_->dim(), "StateConstraint moment map input");
  require_dim(integrand_->moment_dim(), moment_->out_dim(), "StateConstraint moment map output");
}

ConstraintSnapshot::ConstraintSnapshot(const StateConstraint& constraint, double t, const DiscreteMeasure& mu)
    : constraint_(constraint), t_(t), mu_(mu) {
  require_dim(constraint.dim(), mu.dim(), "StateConstraint measure");
  const ConstraintIntegrand& lam = constraint.integrand();
  const MomentMap& m = constraint.moment();
  const int k = m.out_dim();
  const int n = mu.size();

  rbar_ = Vector::Zero(k);
  for (int j = 0; j < n; ++j) rbar_ += mu.weight(j) * m.value(mu.point(j));

  sum_dr_ = Vector::Zero(k);
  sum_dtr_ = Vector::Zero(k);
  sum_drr_ = Matrix::Zero(k, k);
  for (int j = 0; j < n; ++j) {
    const Vector x = mu.point(j);
    const double w = mu.weight(j);
    value_ += w * lam.value(t, x, rbar_);
    time_partial_ += w * lam.d_t(t, x, rbar_);
    sum_dr_ += w * lam.d_r(t, x, rbar_);
    sum_dtr_ += w * lam.d_tr(t, x, rbar_);
    sum_drr_ += w * lam.d_rr(t, x, rbar_);
  }

  grad_.resize(n, mu.dim());
  time_grad_.resize(n, mu.dim());
  for (int i = 0; i < n; ++i) {
    const Vector x = mu.point(i);
    const Matrix dm = m.jacobian(x);
    grad_.row(i) = (lam.d_x(t, x, rbar_) + dm.transpose() * sum_dr_).transpose();
    time_grad_.row(i) = (lam.d_tx(t, x, rbar_) + dm.transpose() * sum_dtr_).transpose();
  }
}

Matrix ConstraintSnapshot::space_jacobian_of_grad(int i) const {
  const Vector x = mu_.point(i);
  const MomentMap& m = constraint_.moment();
  Matrix j = constraint_.integrand().d_xx(t_, x, rbar_);
  for (int k = 0; k < m.out_dim(); ++k) {
    if (sum_dr_(k) != 0.0) j += sum_dr_(k) * m.hessian(x, k);
  }
  return j;
}

Matrix ConstraintSnapshot::gamma_of_grad(int y, int x) const {
  const Vector py = mu_.point(y);
  const Vector px = mu_.point(x);
  const ConstraintIntegrand& lam = constraint_.integrand();
  const MomentMap& m = constraint_.moment();
  const Matrix dmx = m.jacobian(px);
  const Matrix dmy = m.jacobian(py);
  return lam.d_xr(t_, py, rbar_) * dmx +
         dmy.transpose() * (lam.d_xr(t_, px, rbar_).transpose() + sum_drr_ * dmx);
}

double eval_constraint(const StateConstraint& c, double t, const DiscreteMeasure& mu) {
  return ConstraintSnapshot(c, t, mu).value();
}

Matrix grad_constraint(const StateConstraint& c, double t, const DiscreteMeasure& mu) {
  return ConstraintSnapshot(c, t, mu).grad();
}

double time_partial(const StateConstraint& c, double t, const DiscreteMeasure& mu) {
  return ConstraintSnapshot(c, t, mu).time_partial();
}

Matrix time_partial_of_grad(const StateConstraint& c, double t, const DiscreteMeasure& mu) {
  return ConstraintSnapshot(c, t, mu).time_partial_of_grad();
}

std::vector<Matrix> space_jacobian_of_grad(const StateConstraint& c, double t, const DiscreteMeasure& mu) {
  const ConstraintSnapshot snap(c, t, mu);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(mu.size()));
  for (int i = 0; i < mu.size(); ++i) out.push_back(snap.space_jacobian_of_grad(i));
  return out;
}

Matrix gamma_of_grad(const StateConstraint& c, double t, const DiscreteMeasure& mu, int y, int x) {
  return ConstraintSnapshot(c, t, mu).gamma_of_grad(y, x);
}

}  // namespace wpmp
