#include <algorithm>
#include <cmath>

#include "wpmp/pmp.hpp"

namespace wpmp {

double KTable::max_deviation() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v - values.front()));
  return m;
}

bool PMPCertificate::has_violation(const std::string& category) const {
  return std::find(violations.begin(), violations.end(), category) != violations.end();
}

KTable k_table(const TrajectorySolution& traj, const StateCostateCloud& costate, const InteractionKernel& kernel,
               const ControlLaw& law, const MultiplierSet& mults, const ProblemFunctionals& fns,
               const ControlField& omega, int tau, const AtomPaths& F) {
  (void)kernel;
  check_arity(mults, fns);
  const TimeGrid& grid = traj.grid;
  const int steps = grid.steps;
  if (tau < 0 || tau > steps) throw InvalidArgument("k_table: tau out of range");
  if (F.start != tau || F.values.size() != static_cast<std::size_t>(steps - tau + 1)) {
    throw InvalidArgument("k_table: needle linearization does not start at tau");
  }
  const double dt = grid.dt();
  const double l0 = mults.lambda0;
  const bool running = fns.running && l0 != 0.0;

  std::vector<ZetaPath> zetas;
  for (const MultiplierMeasure& m : mults.state) zetas.push_back(zeta_from_measure(m, grid));

  double delta_l = 0.0;
  if (running) {
    const double t = grid.time(tau);
    const DiscreteMeasure mu = traj.cloud(tau);
    delta_l = fns.running->value(t, mu, omega) - fns.running->value(t, mu, law.field_at(t));
  }
  auto running_pairing = [&](int node, int cell) {
    if (!running) return 0.0;
    const DiscreteMeasure mu = traj.cloud(node);
    return l0 * gradient_pairing(mu, fns.running->gradient(grid.time(node), mu, law.field_in_cell(cell)), F.at(node));
  };

  KTable table;
  table.tau = tau;
  double integral = 0.0;
  std::vector<double> atoms_before(fns.state.size(), 0.0);
  for (int k = tau; k <= steps; ++k) {
    if (k > tau) {
      const int cell = traj.step_cell[static_cast<std::size_t>(k - 1)];
      integral += 0.5 * dt * (running_pairing(k - 1, cell) + running_pairing(k, cell));
    }
    const DiscreteMeasure mu = traj.cloud(k);
    double value = gradient_pairing(mu, costate.costates[static_cast<std::size_t>(k)], F.at(k)) - l0 * delta_l -
                   integral;
    for (std::size_t l = 0; l < fns.state.size(); ++l) {
      const double tail = zetas[l].tail(k);
      const double here = zetas[l].node_mass(k);
      if (tail == 0.0 && atoms_before[l] == 0.0) continue;
      const double x = gradient_pairing(mu, grad_constraint(fns.state[l], grid.time(k), mu), F.at(k));
      value -= atoms_before[l] + tail * x;
      atoms_before[l] += here * x;
    }
    if (!std::isfinite(value)) throw NumericalError("k_table: non-finite value at node " + std::to_string(k), k);
    table.values.push_back(value);
  }
  return table;
}

KTable k_table(const TrajectorySolution& traj, const StateCostateCloud& costate, const InteractionKernel& kernel,
               const ControlLaw& law, const MultiplierSet& mults, const ProblemFunctionals& fns,
               const ControlField& omega, int tau) {
  const AtomPaths F = solve_needle_linearization(traj, kernel, law, omega, tau);
  return k_table(traj, costate, kernel, law, mults, fns, omega, tau, F);
}

double k_function(const TrajectorySolution& traj, const StateCostateCloud& costate, const InteractionKernel& kernel,
                  const ControlLaw& law, const MultiplierSet& mults, const ProblemFunctionals& fns,
                  const ControlField& omega, int tau, int t) {
  if (t < tau || t > traj.grid.steps) throw InvalidArgument("k_function: t must lie in [tau, T]");
  return k_table(traj, costate, kernel, law, mults, fns, omega, tau).at(t);
}

PMPCertificate check_certificate(const TrajectorySolution& traj, const StateCostateCloud& costate,
                                 const InteractionKernel& kernel, const ControlLaw& law,
                                 const MultiplierSet& mults, const ProblemFunctionals& fns,
                                 const std::vector<ControlField>& dictionary, const CertificateOptions& options) {
  mults.validate();
  check_arity(mults, fns);
  if (dictionary.empty()) throw InvalidArgument("check_certificate: empty control dictionary");
  for (const ControlField& omega : dictionary) {
    if (omega.basis()->size() != law.basis()->size() || omega.dim() != law.dim()) {
      throw InvalidArgument("check_certificate: dictionary field is not expressed in the control basis");
    }
  }
  const TimeGrid& grid = traj.grid;
  const int steps = grid.steps;
  if (costate.costates.size() != static_cast<std::size_t>(steps + 1)) {
    throw InvalidArgument("check_certificate: costate does not match the trajectory grid");
  }

  PMPCertificate cert;
  cert.multipliers = mults;
  cert.dictionary = dictionary;
  cert.nondegenerate = mults.nondegenerate();
  if (!cert.nondegenerate) cert.violations.emplace_back(violation::kNonDegeneracy);

  std::vector<ZetaPath> zetas;
  for (const MultiplierMeasure& m : mults.state) zetas.push_back(zeta_from_measure(m, grid));

  bool max_ok = true;
  for (int n = 0; n <= steps; ++n) {
    const double t = grid.time(n);
    const DiscreteMeasure mu = traj.cloud(n);
    const Matrix& r = costate.costates[static_cast<std::size_t>(n)];
    Vector zeta(static_cast<Eigen::Index>(zetas.size()));
    bool atom = false;
    for (std::size_t l = 0; l < zetas.size(); ++l) {
      zeta(static_cast<Eigen::Index>(l)) = zetas[l].tail(n);
      atom = atom || zetas[l].node_mass(n) > 0.0;
    }
    NodeGap g{n, t, 0.0, 0.0, 0, 0.0, 0.0, atom, true};
    g.h_reference = hamiltonian(t, mu, r, zeta, kernel, law.field_at(t), fns, mults.lambda0);
    for (std::size_t k = 0; k < dictionary.size(); ++k) {
      const double h = hamiltonian(t, mu, r, zeta, kernel, dictionary[k], fns, mults.lambda0);
      if (k == 0 || h > g.h_best) {
        g.h_best = h;
        g.argmax = static_cast<int>(k);
      }
    }
    g.gap = g.h_best - g.h_reference;
    g.tolerance = options.maximization_tolerance * (1.0 + std::abs(g.h_reference));
    g.ok = g.gap <= g.tolerance;
    max_ok = max_ok && g.ok;
    cert.gaps.push_back(g);
  }
  if (!max_ok) cert.violations.emplace_back(violation::kMaximization);

  const DiscreteMeasure mu_T = traj.cloud(steps);
  bool ineq_ok = true;
  for (std::size_t i = 0; i < fns.inequality.size(); ++i) {
    const double s = std::abs(mults.lambda_inequality(static_cast<Eigen::Index>(i)) * fns.inequality[i].value(mu_T));
    cert.inequality_slackness.push_back(s);
    ineq_ok = ineq_ok && s <= options.slackness_tolerance;
  }
  if (!ineq_ok) cert.violations.emplace_back(violation::kInequalitySlackness);

  bool support_ok = true;
  for (std::size_t l = 0; l < fns.state.size(); ++l) {
    double inactive_mass = 0.0;
    for (int n = 0; n <= steps; ++n) {
      const double m = zetas[l].node_mass(n);
      if (m == 0.0) continue;
      if (eval_constraint(fns.state[l], grid.time(n), traj.cloud(n)) < -options.active_tolerance) inactive_mass += m;
    }
    cert.support_slackness.push_back(inactive_mass);
    support_ok = support_ok && inactive_mass <= options.slackness_tolerance;
  }
  if (!support_ok) cert.violations.emplace_back(violation::kSupportSlackness);

  std::vector<int> nodes = options.k_nodes;
  if (nodes.empty()) {
    for (int q = 0; q < 4; ++q) nodes.push_back(q * steps / 4);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  bool k_ok = true;
  for (std::size_t k = 0; k < dictionary.size(); ++k) {
    for (int tau : nodes) {
      if (tau < 0 || tau > steps) throw InvalidArgument("check_certificate: K node out of range");
      KReport rep{static_cast<int>(k), k_table(traj, costate, kernel, law, mults, fns, dictionary[k], tau), true};
      rep.sign_ok = rep.table.terminal() <= cert.gaps[static_cast<std::size_t>(tau)].tolerance;
      k_ok = k_ok && rep.sign_ok;
      cert.k_reports.push_back(std::move(rep));
    }
  }
  if (!k_ok) cert.violations.emplace_back(violation::kKSign);
  return cert;
}

}  // namespace wpmp
