#include "wpmp/functionals.hpp"

namespace wpmp {

double chainrule_fd_oracle(const MeasureFunctional& F, const DiscreteMeasure& mu, const Matrix& V, double h) {
  if (!(h > 0.0)) throw InvalidArgument("chainrule_fd_oracle: step must be positive");
  require_dim(mu.size(), V.rows(), "chainrule_fd_oracle field rows");
  require_dim(mu.dim(), V.cols(), "chainrule_fd_oracle field columns");
  const double plus = F(mu.with_points(mu.points() + h * V));
  const double minus = F(mu.with_points(mu.points() - h * V));
  return (plus - minus) / (2.0 * h);
}

RichardsonEstimate chainrule_fd_richardson(const MeasureFunctional& F, const DiscreteMeasure& mu,
                                           const Matrix& V, double h) {
  RichardsonEstimate est{};
  est.at_h = chainrule_fd_oracle(F, mu, V, h);
  est.at_half_h = chainrule_fd_oracle(F, mu, V, 0.5 * h);
  est.extrapolated = (4.0 * est.at_half_h - est.at_h) / 3.0;
  return est;
}

double gradient_pairing(const DiscreteMeasure& mu, const Matrix& grad, const Matrix& V) {
  require_dim(mu.size(), grad.rows(), "gradient_pairing gradient rows");
  require_dim(mu.size(), V.rows(), "gradient_pairing field rows");
  return (grad.array() * V.array()).rowwise().sum().matrix().dot(mu.weights());
}

}  // namespace wpmp
