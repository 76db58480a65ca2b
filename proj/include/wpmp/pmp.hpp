#pragma once

#include <optional>

#include "wpmp/dynamics.hpp"
#include "wpmp/functionals.hpp"

namespace wpmp {

/// Nonnegative discrete measure on [0, T] with atoms (time, mass).
struct MultiplierMeasure {
  std::vector<double> times;
  std::vector<double> masses;

  double total() const;
};

struct MultiplierSet {
  double lambda0 = 1.0;
  Vector lambda_inequality;
  Vector eta_equality;
  std::vector<MultiplierMeasure> state;

  /// lambda0 in {0, 1}, lambda_I >= 0, measure masses >= 0.
  void validate() const;
  bool nondegenerate() const;
};

/// Cumulated state multiplier zeta(t) = 1_{[0,T)}(t) varpi([t, T]) on grid nodes.
struct ZetaPath {
  /// varpi mass sitting on each node.
  Vector node_mass;
  /// zeta(t_n); zero at the final node.
  Vector values;

  /// varpi([t_n, T]) without the indicator at T.
  double tail(int node) const;
  /// Value on the open step (t_n, t_{n+1}).
  double step_value(int step) const;
};

ZetaPath zeta_from_measure(const MultiplierMeasure& measure, const TimeGrid& grid);

struct ProblemFunctionals {
  std::optional<TerminalFunctional> terminal;
  std::optional<RunningCost> running;
  std::vector<TerminalFunctional> inequality;
  std::vector<TerminalFunctional> equality;
  std::vector<StateConstraint> state;
};

/// Arity of multipliers against functionals; throws InvalidArgument on mismatch.
void check_arity(const MultiplierSet& mults, const ProblemFunctionals& fns);

/// phi(mu_T) + int_0^T L(t, mu(t), u(t)) dt, trapezoid per step with the step's control cell.
double objective_value(const TrajectorySolution& traj, const ControlLaw& law, const ProblemFunctionals& fns);

/// lambda0 grad phi + sum lambda_i grad Psi^I_i + sum eta_j grad Psi^E_j at the atoms of mu_T.
Matrix final_gradient(const MultiplierSet& mults, const ProblemFunctionals& fns, const DiscreteMeasure& mu_T,
                      Diagnostics* diag = nullptr);

/// C(t, mu, zeta, omega) = sum_l zeta_l (d_t Lambda_l + int <grad Lambda_l, v[mu] + omega> dmu).
double penalized_constraint(double t, const DiscreteMeasure& mu, const Vector& zeta, const InteractionKernel& kernel,
                            const ControlField& omega, const std::vector<StateConstraint>& constraints);

/// Wasserstein gradient of mu -> C(t, mu, zeta, omega) with omega held fixed, at the atoms of mu.
Matrix grad_penalized_constraint(double t, const DiscreteMeasure& mu, const Vector& zeta,
                                 const InteractionKernel& kernel, const ControlField& omega,
                                 const std::vector<StateConstraint>& constraints);

/// Particles (x_i, r_i) with weights; positions are the forward trajectory nodes.
struct StateCostateCloud {
  TimeGrid grid;
  Vector weights;
  std::vector<Matrix> positions;
  std::vector<Matrix> costates;

  DiscreteMeasure marginal(int node) const;
};

/// Backward RK4 of r' = lambda0 grad L + grad C - D_x(u + v)^T r - sum_j w_j Gamma^v(x_j, x_i)^T r_j
/// from r(T) = -final_gradient. Midpoint stage positions use cubic Hermite interpolation.
StateCostateCloud solve_costate_backward(const TrajectorySolution& traj, const InteractionKernel& kernel,
                                         const ControlLaw& law, const MultiplierSet& mults,
                                         const ProblemFunctionals& fns);

/// sum_i w_i <r_i, v[mu](x_i) + omega(x_i)> - lambda0 L(t, mu, omega) - C(t, mu, zeta, omega).
double hamiltonian(double t, const DiscreteMeasure& mu, const Matrix& costate, const Vector& zeta,
                   const InteractionKernel& kernel, const ControlField& omega, const ProblemFunctionals& fns,
                   double lambda0);

/// K(t) for t = tau..T. With X_l(s) = int <grad Lambda_l(s), F(s)> dmu(s):
///   K(t) = int <r, F>(t) - lambda0 (L(tau, omega) - L(tau, u)) - int_tau^t int <lambda0 grad L, F> ds
///          - sum_l [ sum_{atoms s in [tau, t)} varpi_l({s}) X_l(s) + varpi_l([t, T]) X_l(t) ].
struct KTable {
  int tau = 0;
  std::vector<double> values;

  double at(int node) const { return values.at(static_cast<std::size_t>(node - tau)); }
  double terminal() const { return values.back(); }
  double max_deviation() const;
};

KTable k_table(const TrajectorySolution& traj, const StateCostateCloud& costate, const InteractionKernel& kernel,
               const ControlLaw& law, const MultiplierSet& mults, const ProblemFunctionals& fns,
               const ControlField& omega, int tau, const AtomPaths& F);

KTable k_table(const TrajectorySolution& traj, const StateCostateCloud& costate, const InteractionKernel& kernel,
               const ControlLaw& law, const MultiplierSet& mults, const ProblemFunctionals& fns,
               const ControlField& omega, int tau);

double k_function(const TrajectorySolution& traj, const StateCostateCloud& costate, const InteractionKernel& kernel,
                  const ControlLaw& law, const MultiplierSet& mults, const ProblemFunctionals& fns,
                  const ControlField& omega, int tau, int t);

struct CertificateOptions {
  double maximization_tolerance = 1e-6;
  double active_tolerance = 1e-6;
  double slackness_tolerance = 1e-6;
  /// Base nodes for K tables; empty means 0, S/4, S/2, 3S/4.
  std::vector<int> k_nodes;
};

struct NodeGap {
  int node;
  double time;
  double h_reference;
  double h_best;
  int argmax;
  double gap;
  double tolerance;
  bool has_state_atom;
  bool ok;
};

struct KReport {
  int dictionary_index;
  KTable table;
  bool sign_ok;
};

namespace violation {
inline constexpr const char* kMaximization = "maximization";
inline constexpr const char* kNonDegeneracy = "non_degeneracy";
inline constexpr const char* kInequalitySlackness = "inequality_slackness";
inline constexpr const char* kSupportSlackness = "support_slackness";
inline constexpr const char* kKSign = "k_sign";
}  // namespace violation

struct PMPCertificate {
  MultiplierSet multipliers;
  std::vector<ControlField> dictionary;
  std::vector<NodeGap> gaps;
  /// |lambda_i Psi^I_i(mu_T)|.
  std::vector<double> inequality_slackness;
  /// varpi_l mass on nodes where Lambda_l < -active_tolerance.
  std::vector<double> support_slackness;
  std::vector<KReport> k_reports;
  bool nondegenerate = false;
  std::vector<std::string> violations;

  bool has_violation(const std::string& category) const;
  bool passed() const { return violations.empty(); }
};

/// Maximization gaps use the closed tail mass varpi([t_n, T]) for zeta at each node.
PMPCertificate check_certificate(const TrajectorySolution& traj, const StateCostateCloud& costate,
                                 const InteractionKernel& kernel, const ControlLaw& law,
                                 const MultiplierSet& mults, const ProblemFunctionals& fns,
                                 const std::vector<ControlField>& dictionary, const CertificateOptions& options = {});

}  // namespace wpmp
