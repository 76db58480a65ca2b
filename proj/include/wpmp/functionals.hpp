#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "wpmp/fields.hpp"

namespace wpmp {

/// Symmetric or asymmetric n-slot potential W(x_1, ..., x_n) with per-slot gradients.
struct Potential {
  std::string id;
  int arity = 1;
  int dim = 1;
  std::function<double(const std::vector<Vector>&)> value;
  std::function<Vector(const std::vector<Vector>&, int)> gradient;
};

/// Catalog:
///   arity 1: "half_sq_norm" {center}, "linear" {slope}, "fixture_wrong_gradient"
///   arity 2: "half_sq_dist", "gaussian_interaction" {sigma}
///   arity 3: "three_body"  W = <x1 - x2, x2 - x3>
Potential make_potential(const std::string& id, int dim, const Params& params = {});

/// phi(mu) = int W d mu^{(x)n}.
struct NBody {
  static constexpr double kTupleCap = 1e6;
  Potential potential;
};

/// phi(mu) = 1/2 int |x - mean|^2 d mu.
struct Variance {};

/// phi(mu) = 1/2 int d_S(x)^2 d mu with S a finite point set (rows).
struct SupportDistance {
  Matrix targets;
};

/// Endpoint functional phi, Psi^I or Psi^E: one of the shipped families plus a constant offset.
class TerminalFunctional {
 public:
  using Family = std::variant<NBody, Variance, SupportDistance>;

  TerminalFunctional(std::string name, Family family, double offset = 0.0);

  const std::string& name() const { return name_; }
  const Family& family() const { return family_; }
  double offset() const { return offset_; }

  double value(const DiscreteMeasure& mu) const;
  /// Wasserstein gradient at each atom (rows). Nearest-point ties in
  /// SupportDistance pick the lowest index and are reported to `diag`.
  Matrix gradient(const DiscreteMeasure& mu, Diagnostics* diag = nullptr) const;

 private:
  std::string name_;
  Family family_;
  double offset_;
};

double eval_terminal(const TerminalFunctional& phi, const DiscreteMeasure& mu);
Matrix grad_terminal(const TerminalFunctional& phi, const DiscreteMeasure& mu, Diagnostics* diag = nullptr);

/// Moment map m : R^d -> R^k with Jacobian (k x d) and per-component Hessians.
class MomentMap {
 public:
  MomentMap(int dim, int out_dim) : dim_(dim), out_dim_(out_dim) {}
  virtual ~MomentMap() = default;
  int dim() const { return dim_; }
  int out_dim() const { return out_dim_; }
  virtual std::string id() const = 0;
  virtual Vector value(const Vector& x) const = 0;
  virtual Matrix jacobian(const Vector& x) const = 0;
  virtual Matrix hessian(const Vector& x, int component) const = 0;

 private:
  int dim_;
  int out_dim_;
};

using MomentPtr = std::shared_ptr<const MomentMap>;

/// Catalog: "zero" (k = 1), "identity" (k = d), "square_norm" (k = 1),
/// "gaussian_bump" {center, sigma} (k = 1), "sin" (k = d).
MomentPtr make_moment_map(const std::string& id, int dim, const Params& params = {});

/// Running integrand l(t, x, v, r) with first partials.
class RunningIntegrand {
 public:
  RunningIntegrand(int dim, int moment_dim) : dim_(dim), moment_dim_(moment_dim) {}
  virtual ~RunningIntegrand() = default;
  int dim() const { return dim_; }
  int moment_dim() const { return moment_dim_; }
  virtual std::string id() const = 0;
  virtual double value(double t, const Vector& x, const Vector& v, const Vector& r) const = 0;
  virtual Vector grad_x(double t, const Vector& x, const Vector& v, const Vector& r) const = 0;
  virtual Vector grad_v(double t, const Vector& x, const Vector& v, const Vector& r) const = 0;
  virtual Vector grad_r(double t, const Vector& x, const Vector& v, const Vector& r) const = 0;

 private:
  int dim_;
  int moment_dim_;
};

using RunningIntegrandPtr = std::shared_ptr<const RunningIntegrand>;

/// Catalog: "control_energy" {scale}: scale/2 |v|^2, "linear_state" {slope}: <a, x>,
/// "moment_sum": sum_k r_k, "mean_tracking" {target}: 1/2 |r - target|^2,
/// "congestion" {rho}: 1/2 |v|^2 (1 + rho sum_k r_k), "state_energy" {weight, center}.
RunningIntegrandPtr make_running_integrand(const std::string& id, int dim, int moment_dim,
                                           const Params& params = {});

/// L(t, mu, omega) = int l(t, x, omega(x), int m dmu) dmu.
class RunningCost {
 public:
  RunningCost(std::string name, RunningIntegrandPtr integrand, MomentPtr moment);

  const std::string& name() const { return name_; }
  double value(double t, const DiscreteMeasure& mu, const ControlField& omega) const;
  Matrix gradient(double t, const DiscreteMeasure& mu, const ControlField& omega) const;

 private:
  std::string name_;
  RunningIntegrandPtr integrand_;
  MomentPtr moment_;
};

double eval_running(const RunningCost& cost, double t, const DiscreteMeasure& mu, const ControlLaw& law);
Matrix grad_running(const RunningCost& cost, double t, const DiscreteMeasure& mu, const ControlLaw& law);

/// Constraint integrand lambda(t, x, r), C^2 with the partials listed below.
class ConstraintIntegrand {
 public:
  ConstraintIntegrand(int dim, int moment_dim) : dim_(dim), moment_dim_(moment_dim) {}
  virtual ~ConstraintIntegrand() = default;
  int dim() const { return dim_; }
  int moment_dim() const { return moment_dim_; }
  virtual std::string id() const = 0;
  virtual double value(double t, const Vector& x, const Vector& r) const = 0;
  virtual double d_t(double t, const Vector& x, const Vector& r) const = 0;
  virtual Vector d_x(double t, const Vector& x, const Vector& r) const = 0;
  virtual Vector d_r(double t, const Vector& x, const Vector& r) const = 0;
  virtual Vector d_tx(double t, const Vector& x, const Vector& r) const = 0;
  virtual Vector d_tr(double t, const Vector& x, const Vector& r) const = 0;
  virtual Matrix d_xx(double t, const Vector& x, const Vector& r) const = 0;
  /// d x k block d^2 lambda / dx dr.
  virtual Matrix d_xr(double t, const Vector& x, const Vector& r) const = 0;
  virtual Matrix d_rr(double t, const Vector& x, const Vector& r) const = 0;

 private:
  int dim_;
  int moment_dim_;
};

using ConstraintIntegrandPtr = std::shared_ptr<const ConstraintIntegrand>;

/// Catalog: "affine" {slope, beta, offset, moment_slope}: <a,x> + beta t + offset + <b,r>,
/// "half_sq_norm" {center, radius}: 1/2 |x - c|^2 - 1/2 radius^2,
/// "mean_coupling" {alpha, kappa}: (1 + alpha t)<x, r> + kappa/2 |r|^2 + sin(t)/2 |x|^2 (k = d),
/// "moment_threshold" {level}: 1/2 |r|^2 - 1/2 level^2.
ConstraintIntegrandPtr make_constraint_integrand(const std::string& id, int dim, int moment_dim,
                                                 const Params& params = {});

/// State constraint Lambda(t, mu) = int lambda(t, x, int m dmu) dmu <= 0.
class StateConstraint {
 public:
  StateConstraint(std::string name, ConstraintIntegrandPtr integrand, MomentPtr moment);

  const std::string& name() const { return name_; }
  const ConstraintIntegrand& integrand() const { return *integrand_; }
  const MomentMap& moment() const { return *moment_; }
  int dim() const { return integrand_->dim(); }

 private:
  std::string name_;
  ConstraintIntegrandPtr integrand_;
  MomentPtr moment_;
};

/// Aggregates of a StateConstraint at (t, mu); every derivative map is evaluated at atoms.
class ConstraintSnapshot {
 public:
  ConstraintSnapshot(const StateConstraint& constraint, double t, const DiscreteMeasure& mu);

  double value() const { return value_; }
  double time_partial() const { return time_partial_; }
  /// Rows: grad_mu Lambda at each atom.
  const Matrix& grad() const { return grad_; }
  /// Rows: d/dt grad_mu Lambda at each atom.
  const Matrix& time_partial_of_grad() const { return time_grad_; }
  /// D_x grad_mu Lambda at atom i.
  Matrix space_jacobian_of_grad(int i) const;
  /// Gamma^{grad Lambda}_{(x_y)}(x_x): measure derivative of grad_mu Lambda(x_y) at x_x.
  Matrix gamma_of_grad(int y, int x) const;

 private:
  StateConstraint constraint_;
  double t_;
  DiscreteMeasure mu_;
  Vector rbar_;
  Vector sum_dr_;
  Vector sum_dtr_;
  Matrix sum_drr_;
  double value_ = 0.0;
  double time_partial_ = 0.0;
  Matrix grad_;
  Matrix time_grad_;
};

double eval_constraint(const StateConstraint& c, double t, const DiscreteMeasure& mu);
Matrix grad_constraint(const StateConstraint& c, double t, const DiscreteMeasure& mu);
double time_partial(const StateConstraint& c, double t, const DiscreteMeasure& mu);
Matrix time_partial_of_grad(const StateConstraint& c, double t, const DiscreteMeasure& mu);
std::vector<Matrix> space_jacobian_of_grad(const StateConstraint& c, double t, const DiscreteMeasure& mu);
Matrix gamma_of_grad(const StateConstraint& c, double t, const DiscreteMeasure& mu, int y, int x);

using MeasureFunctional = std::function<double(const DiscreteMeasure&)>;

/// [F((Id + hV)#mu) - F((Id - hV)#mu)] / (2h); rows of V are the field at atoms.
double chainrule_fd_oracle(const MeasureFunctional& F, const DiscreteMeasure& mu, const Matrix& V,
                           double h = 1e-4);

struct RichardsonEstimate {
  double at_h;
  double at_half_h;
  double extrapolated;
};

RichardsonEstimate chainrule_fd_richardson(const MeasureFunctional& F, const DiscreteMeasure& mu,
                                           const Matrix& V, double h = 1e-4);

/// sum_i w_i <grad_i, V_i>.
double gradient_pairing(const DiscreteMeasure& mu, const Matrix& grad, const Matrix& V);

}  // namespace wpmp
