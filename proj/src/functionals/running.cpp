#include "wpmp/functionals.hpp"

namespace wpmp {

namespace {

Vector moment_mean(const MomentMap& m, const DiscreteMeasure& mu) {
  Vector r = Vector::Zero(m.out_dim());
  for (int j = 0; j < mu.size(); ++j) r += mu.weight(j) * m.value(mu.point(j));
  return r;
}

}  // namespace

RunningCost::RunningCost(std::string name, RunningIntegrandPtr integrand, MomentPtr moment)
    : name_(std::move(name)), integrand_(std::move(integrand)), moment_(std::move(moment)) {
  if (!integrand_ || !moment_) throw InvalidArgument("RunningCost: integrand and moment map are required");
  require_dim(integrand_->dim(), moment_->dim(), "RunningCost moment map input");
  require_dim(integrand_->moment_dim(), moment_->out_dim(), "RunningCost moment map output");
}

double RunningCost::value(double t, const DiscreteMeasure& mu, const ControlField& omega) const {
  require_dim(integrand_->dim(), mu.dim(), "RunningCost measure");
  require_dim(integrand_->dim(), omega.dim(), "RunningCost control");
  const Vector r = moment_mean(*moment_, mu);
  double total = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    const Vector x = mu.point(i);
    total += mu.weight(i) * integrand_->value(t, x, omega.value(x), r);
  }
  return total;
}

Matrix RunningCost::gradient(double t, const DiscreteMeasure& mu, const ControlField& omega) const {
  require_dim(integrand_->dim(), mu.dim(), "RunningCost measure");
  require_dim(integrand_->dim(), omega.dim(), "RunningCost control");
  const Vector r = moment_mean(*moment_, mu);
  Vector mean_dr = Vector::Zero(moment_->out_dim());
  for (int j = 0; j < mu.size(); ++j) {
    const Vector x = mu.point(j);
    mean_dr += mu.weight(j) * integrand_->grad_r(t, x, omega.value(x), r);
  }
  Matrix g(mu.size(), mu.dim());
  for (int i = 0; i < mu.size(); ++i) {
    const Vector x = mu.point(i);
    const Vector v = omega.value(x);
    g.row(i) = (integrand_->grad_x(t, x, v, r) + omega.jacobian(x).transpose() * integrand_->grad_v(t, x, v, r) +
                moment_->jacobian(x).transpose() * mean_dr)
                   .transpose();
  }
  return g;
}

double eval_running(const RunningCost& cost, double t, const DiscreteMeasure& mu, const ControlLaw& law) {
  return cost.value(t, mu, law.field_at(t));
}

Matrix grad_running(const RunningCost& cost, double t, const DiscreteMeasure& mu, const ControlLaw& law) {
  return cost.gradient(t, mu, law.field_at(t));
}

}  // namespace wpmp
