#include "wpmp/pmp.hpp"

namespace wpmp {

namespace {

void check_zeta(const Vector& zeta, const std::vector<StateConstraint>& constraints) {
  if (static_cast<std::size_t>(zeta.size()) != constraints.size()) {
    throw InvalidArgument("zeta has " + std::to_string(zeta.size()) + " entries for " +
                          std::to_string(constraints.size()) + " state constraints");
  }
}

// Rows: v[mu](x_i) + omega(x_i).
Matrix total_field(double t, const DiscreteMeasure& mu, const InteractionKernel& kernel, const ControlField& omega) {
  Matrix f = kernel.velocities(t, mu.points(), mu.weights(), mu.points());
  for (int i = 0; i < mu.size(); ++i) f.row(i) += omega.value(mu.point(i)).transpose();
  return f;
}

}  // namespace

double penalized_constraint(double t, const DiscreteMeasure& mu, const Vector& zeta, const InteractionKernel& kernel,
                            const ControlField& omega, const std::vector<StateConstraint>& constraints) {
  check_zeta(zeta, constraints);
  double c = 0.0;
  Matrix f;
  for (std::size_t l = 0; l < constraints.size(); ++l) {
    const double z = zeta(static_cast<Eigen::Index>(l));
    if (z == 0.0) continue;
    if (f.size() == 0) f = total_field(t, mu, kernel, omega);
    const ConstraintSnapshot snap(constraints[l], t, mu);
    c += z * (snap.time_partial() + gradient_pairing(mu, snap.grad(), f));
  }
  return c;
}

Matrix grad_penalized_constraint(double t, const DiscreteMeasure& mu, const Vector& zeta,
                                 const InteractionKernel& kernel, const ControlField& omega,
                                 const std::vector<StateConstraint>& constraints) {
  check_zeta(zeta, constraints);
  const int n = mu.size();
  const int d = mu.dim();
  const Vector& w = mu.weights();
  Matrix out = Matrix::Zero(n, d);
  bool any = false;
  for (Eigen::Index l = 0; l < zeta.size(); ++l) any = any || zeta(l) != 0.0;
  if (!any) return out;

  const Matrix f = total_field(t, mu, kernel, omega);
  std::vector<Matrix> jac(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Matrix a = omega.jacobian(mu.point(i));
    if (!kernel.is_zero()) a += eval_velocity_jacobian(kernel, mu, t, mu.point(i));
    jac[static_cast<std::size_t>(i)] = std::move(a);
  }

  for (std::size_t l = 0; l < constraints.size(); ++l) {
    const double z = zeta(static_cast<Eigen::Index>(l));
    if (z == 0.0) continue;
    const ConstraintSnapshot snap(constraints[l], t, mu);
    const Matrix& g = snap.grad();
    for (int i = 0; i < n; ++i) {
      const Vector xi = mu.point(i);
      Vector r = snap.time_partial_of_grad().row(i).transpose();
      r += snap.space_jacobian_of_grad(i).transpose() * f.row(i).transpose();
      r += jac[static_cast<std::size_t>(i)].transpose() * g.row(i).transpose();
      for (int j = 0; j < n; ++j) {
        if (w(j) == 0.0) continue;
        if (!kernel.is_zero()) {
          r += w(j) * (kernel.jac_y(t, mu.point(j), xi).transpose() * g.row(j).transpose());
        }
        r += w(j) * (snap.gamma_of_grad(j, i).transpose() * f.row(j).transpose());
      }
      out.row(i) += z * r.transpose();
    }
  }
  return out;
}

double hamiltonian(double t, const DiscreteMeasure& mu, const Matrix& costate, const Vector& zeta,
                   const InteractionKernel& kernel, const ControlField& omega, const ProblemFunctionals& fns,
                   double lambda0) {
  require_dim(mu.size(), costate.rows(), "hamiltonian costate rows");
  require_dim(mu.dim(), costate.cols(), "hamiltonian costate columns");
  double h = gradient_pairing(mu, costate, total_field(t, mu, kernel, omega));
  if (fns.running && lambda0 != 0.0) h -= lambda0 * fns.running->value(t, mu, omega);
  if (!fns.state.empty()) h -= penalized_constraint(t, mu, zeta, kernel, omega, fns.state);
  return h;
}

}  // namespace wpmp
