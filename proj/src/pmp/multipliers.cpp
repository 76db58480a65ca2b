#include <cmath>

#include "wpmp/pmp.hpp"

namespace wpmp {

double MultiplierMeasure::total() const {
  double s = 0.0;
  for (double m : masses) s += m;
  return s;
}

void MultiplierSet::validate() const {
  if (lambda0 != 0.0 && lambda0 != 1.0) throw InvalidArgument("lambda0 must be 0 or 1");
  for (Eigen::Index i = 0; i < lambda_inequality.size(); ++i) {
    if (!(lambda_inequality(i) >= 0.0)) throw InvalidArgument("inequality multipliers must be nonnegative");
  }
  if (!eta_equality.allFinite()) throw InvalidArgument("equality multipliers must be finite");
  for (const MultiplierMeasure& m : state) {
    if (m.times.size() != m.masses.size()) throw InvalidArgument("state multiplier: times and masses differ in size");
    for (double a : m.masses) {
      if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("state multiplier masses must be nonnegative");
    }
  }
}

bool MultiplierSet::nondegenerate() const {
  double s = std::abs(lambda0) + lambda_inequality.cwiseAbs().sum() + eta_equality.cwiseAbs().sum();
  for (const MultiplierMeasure& m : state) s += m.total();
  return s > 0.0;
}

double ZetaPath::tail(int node) const {
  if (node < 0 || node >= node_mass.size()) throw InvalidArgument("ZetaPath: node out of range");
  return node_mass.tail(node_mass.size() - node).sum();
}

double ZetaPath::step_value(int step) const {
  if (step < 0 || step + 1 >= node_mass.size()) throw InvalidArgument("ZetaPath: step out of range");
  return tail(step + 1);
}

ZetaPath zeta_from_measure(const MultiplierMeasure& measure, const TimeGrid& grid) {
  if (measure.times.size() != measure.masses.size()) {
    throw InvalidArgument("state multiplier: times and masses differ in size");
  }
  ZetaPath z;
  z.node_mass = Vector::Zero(grid.steps + 1);
  for (std::size_t a = 0; a < measure.times.size(); ++a) {
    const double t = measure.times[a];
    if (t < -1e-12 || t > grid.horizon * (1.0 + 1e-12)) {
      throw InvalidArgument("state multiplier atom at t = " + std::to_string(t) + " lies outside [0, T]");
    }
    if (!(measure.masses[a] >= 0.0)) throw InvalidArgument("state multiplier masses must be nonnegative");
    z.node_mass(grid.node_at(t)) += measure.masses[a];
  }
  z.values = Vector::Zero(grid.steps + 1);
  double acc = 0.0;
  for (int n = grid.steps; n >= 0; --n) {
    acc += z.node_mass(n);
    z.values(n) = n == grid.steps ? 0.0 : acc;
  }
  return z;
}

void check_arity(const MultiplierSet& mults, const ProblemFunctionals& fns) {
  if (static_cast<std::size_t>(mults.lambda_inequality.size()) != fns.inequality.size()) {
    throw InvalidArgument("expected " + std::to_string(fns.inequality.size()) + " inequality multipliers, got " +
                          std::to_string(mults.lambda_inequality.size()));
  }
  if (static_cast<std::size_t>(mults.eta_equality.size()) != fns.equality.size()) {
    throw InvalidArgument("expected " + std::to_string(fns.equality.size()) + " equality multipliers, got " +
                          std::to_string(mults.eta_equality.size()));
  }
  if (mults.state.size() != fns.state.size()) {
    throw InvalidArgument("expected " + std::to_string(fns.state.size()) + " state multiplier measures, got " +
                          std::to_string(mults.state.size()));
  }
}

Matrix final_gradient(const MultiplierSet& mults, const ProblemFunctionals& fns, const DiscreteMeasure& mu_T,
                      Diagnostics* diag) {
  check_arity(mults, fns);
  Matrix g = Matrix::Zero(mu_T.size(), mu_T.dim());
  if (fns.terminal && mults.lambda0 != 0.0) g += mults.lambda0 * fns.terminal->gradient(mu_T, diag);
  for (std::size_t i = 0; i < fns.inequality.size(); ++i) {
    const double l = mults.lambda_inequality(static_cast<Eigen::Index>(i));
    if (l != 0.0) g += l * fns.inequality[i].gradient(mu_T, diag);
  }
  for (std::size_t j = 0; j < fns.equality.size(); ++j) {
    const double e = mults.eta_equality(static_cast<Eigen::Index>(j));
    if (e != 0.0) g += e * fns.equality[j].gradient(mu_T, diag);
  }
  return g;
}

double objective_value(const TrajectorySolution& traj, const ControlLaw& law, const ProblemFunctionals& fns) {
  double total = fns.terminal ? fns.terminal->value(traj.cloud(traj.grid.steps)) : 0.0;
  if (!fns.running) return total;
  const double dt = traj.grid.dt();
  for (int n = 0; n < traj.grid.steps; ++n) {
    const ControlField u = law.field_in_cell(traj.step_cell[static_cast<std::size_t>(n)]);
    total += 0.5 * dt * (fns.running->value(traj.grid.time(n), traj.cloud(n), u) +
                         fns.running->value(traj.grid.time(n + 1), traj.cloud(n + 1), u));
  }
  return total;
}

}  // namespace wpmp
