#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "wpmp/fields.hpp"

namespace wpmp {

namespace {

constexpr double kJacobianStep = 1e-4;
constexpr double kJacobianTolerance = 1e-5;

Vector sample_ball(std::mt19937_64& rng, int dim, double radius) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector dir(dim);
  for (int k = 0; k < dim; ++k) dir(k) = gauss(rng);
  const double n = dir.norm();
  if (n == 0.0) return Vector::Zero(dim);
  return dir / n * radius * std::pow(unit(rng), 1.0 / dim);
}

double relative_error(const Matrix& fd, const Matrix& an) {
  return (fd - an).cwiseAbs().maxCoeff() / (1.0 + an.cwiseAbs().maxCoeff());
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

HypothesisReport check_hypotheses(const InteractionKernel& kernel, const ControlLaw& law, double radius,
                                  int samples, std::uint64_t seed) {
  if (!(radius > 0.0)) throw InvalidArgument("check_hypotheses: radius must be positive");
  if (samples < 1) throw InvalidArgument("check_hypotheses: sample count must be positive");
  require_dim(kernel.dim(), law.dim(), "check_hypotheses");

  const int d = kernel.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> time(0.0, law.horizon());

  HypothesisReport rep;
  rep.samples = samples;
  rep.radius = radius;
  rep.declared = kernel.bounds();
  rep.declared_sublinearity = rep.declared.sublinearity * (1.0 + radius);
  rep.declared_control_bound = law.bound();

  // Random interior samples plus fixed boundary probes.
  std::vector<Vector> xs;
  std::vector<Vector> ys;
  for (int s = 0; s < samples; ++s) {
    xs.push_back(sample_ball(rng, d, radius));
    ys.push_back(sample_ball(rng, d, radius));
  }
  for (int k = 0; k < d; ++k) {
    xs.push_back(radius * Vector::Unit(d, k));
    ys.push_back(-radius * Vector::Unit(d, k));
    xs.push_back(Vector::Zero(d));
    ys.push_back(radius * Vector::Unit(d, k));
  }

  for (std::size_t s = 0; s < xs.size(); ++s) {
    const double t = time(rng);
    const Vector& x = xs[s];
    const Vector& y = ys[s];
    const Vector h = kernel.eval(t, x, y);
    rep.estimated_sublinearity = std::max(rep.estimated_sublinearity, h.norm() / (1.0 + x.norm()));

    const Matrix jx = kernel.jac_x(t, x, y);
    const Matrix jy = kernel.jac_y(t, x, y);
    const Eigen::JacobiSVD<Matrix> svd_x(jx);
    const Eigen::JacobiSVD<Matrix> svd_y(jy);
    rep.estimated_lipschitz_space = std::max(rep.estimated_lipschitz_space, svd_x.singularValues()(0));
    rep.estimated_lipschitz_measure = std::max(rep.estimated_lipschitz_measure, svd_y.singularValues()(0));

    Matrix fdx(d, d);
    Matrix fdy(d, d);
    for (int k = 0; k < d; ++k) {
      const Vector e = kJacobianStep * Vector::Unit(d, k);
      fdx.col(k) = (kernel.eval(t, x + e, y) - kernel.eval(t, x - e, y)) / (2.0 * kJacobianStep);
      fdy.col(k) = (kernel.eval(t, x, y + e) - kernel.eval(t, x, y - e)) / (2.0 * kJacobianStep);
    }
    rep.jacobian_error = std::max({rep.jacobian_error, relative_error(fdx, jx), relative_error(fdy, jy)});
  }

  for (int c = 0; c < law.cells(); ++c) {
    const ControlField u = law.field_in_cell(c);
    double sup = 0.0;
    double lip = 0.0;
    for (const Vector& x : xs) {
      sup = std::max(sup, u.value(x).norm());
      const Eigen::JacobiSVD<Matrix> svd(u.jacobian(x));
      lip = std::max(lip, svd.singularValues()(0));
    }
    rep.estimated_control_bound = std::max(rep.estimated_control_bound, sup + lip);
  }

  const double slack = 1e-12;
  if (rep.estimated_control_bound > law.bound() * (1.0 + slack) + slack) {
    rep.control_ok = false;
    rep.violations.push_back("control sup + Lipschitz estimate " + fmt(rep.estimated_control_bound) +
                             " exceeds L_U = " + fmt(law.bound()));
  }
  if (rep.estimated_sublinearity > rep.declared_sublinearity * (1.0 + slack) + slack) {
    rep.velocity_ok = false;
    rep.violations.push_back("velocity sublinearity estimate " + fmt(rep.estimated_sublinearity) +
                             " exceeds declared M(1+R) = " + fmt(rep.declared_sublinearity));
  }
  if (rep.estimated_lipschitz_space > rep.declared.lipschitz_space * (1.0 + 1e-6) + slack) {
    rep.velocity_ok = false;
    rep.violations.push_back("velocity spatial Lipschitz estimate " + fmt(rep.estimated_lipschitz_space) +
                             " exceeds declared L1 = " + fmt(rep.declared.lipschitz_space));
  }
  if (rep.estimated_lipschitz_measure > rep.declared.lipschitz_measure * (1.0 + 1e-6) + slack) {
    rep.velocity_ok = false;
    rep.violations.push_back("velocity measure Lipschitz estimate " + fmt(rep.estimated_lipschitz_measure) +
                             " exceeds declared L2 = " + fmt(rep.declared.lipschitz_measure));
  }
  if (rep.jacobian_error > kJacobianTolerance) {
    rep.jacobians_ok = false;
    rep.violations.push_back("kernel Jacobians disagree with central differences, relative error " +
                             fmt(rep.jacobian_error));
  }
  rep.limitation =
      "Constants are estimated from " + std::to_string(rep.samples) +
      " sampled points in the ball of radius " + fmt(radius) +
      "; uniform measure-differentiability of the velocity field is sample-checked only, not proven.";
  return rep;
}

}  // namespace wpmp
