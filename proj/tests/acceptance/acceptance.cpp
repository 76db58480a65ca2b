// Acceptance gates: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "catalog.hpp"
#include "oracles.hpp"
#include "wpmp/cli.hpp"
#include "wpmp/pmp.hpp"

using namespace wpmp;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (!ok) detail << "; ";
      ok = false;
      detail << what;
    }
  }
};

std::string scenario_path(const std::string& name) { return std::string(WPMP_SCENARIO_DIR) + "/" + name; }

Matrix normal_field(std::mt19937_64& rng, int n, int d) {
  std::normal_distribution<double> g;
  Matrix V(n, d);
  for (Eigen::Index i = 0; i < V.size(); ++i) V(i) = g(rng);
  return V;
}

double pairing(const DiscreteMeasure& mu, const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (int i = 0; i < mu.size(); ++i) s += mu.weight(i) * a.row(i).dot(b.row(i));
  return s;
}

double rel(double fd, double an) { return std::abs(fd - an) / (1.0 + std::abs(an)); }

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

struct Solved {
  cli::Scenario sc;
  TrajectorySolution traj;
  StateCostateCloud costate;
};

Solved solve(const std::string& name, const cli::Overrides& ov = {}) {
  cli::Scenario sc = cli::load_scenario_file(scenario_path(name), ov);
  TrajectorySolution traj = solve_forward(sc.initial, *sc.kernel, *sc.law, sc.grid);
  StateCostateCloud costate = solve_costate_backward(traj, *sc.kernel, *sc.law, sc.multipliers, sc.functionals);
  if (sc.costate_sign != 1.0) {
    for (Matrix& r : costate.costates) r *= sc.costate_sign;
  }
  return {std::move(sc), std::move(traj), std::move(costate)};
}

PMPCertificate certify(const Solved& s) {
  return check_certificate(s.traj, s.costate, *s.sc.kernel, *s.sc.law, s.sc.multipliers, s.sc.functionals,
                           s.sc.dictionary, s.sc.certificate);
}

BasisPtr constant_basis_1d() {
  return std::make_shared<const ControlBasis>(1, std::vector<BasisFieldPtr>{make_basis_field("constant", 1)});
}

DiscreteMeasure symmetric_pair() {
  Matrix pts(2, 1);
  pts << -1.0, 1.0;
  return DiscreteMeasure::uniform(pts);
}

double collapse_error(int steps) {
  const KernelPtr k = make_kernel("linear_attraction", 1);
  const ControlLaw law = ControlLaw::constant(constant_basis_1d(), 1.0, Vector::Zero(1), 1.0);
  const TrajectorySolution traj = solve_forward(symmetric_pair(), *k, law, TimeGrid(1.0, steps));
  double err = 0.0;
  for (int n = 0; n <= steps; ++n) {
    const double e = std::exp(-traj.grid.time(n));
    err = std::max({err, std::abs(traj.nodes[n](0, 0) + e), std::abs(traj.nodes[n](1, 0) - e)});
  }
  return err;
}

void gradients(Outcome& out) {
  std::mt19937_64 rng(1001);
  double worst = 0.0, worst_pen = 0.0;
  int checked = 0;
  for (int d : {1, 2}) {
    for (const catalog::Case& c : catalog::shipped_functionals(d)) {
      double w = 0.0;
      for (int trial = 0; trial < 20; ++trial) {
        const DiscreteMeasure mu = oracle::random_measure(rng, 10, d);
        const Matrix V = normal_field(rng, 10, d);
        w = std::max(w, rel(chainrule_fd_richardson(c.value, mu, V).extrapolated, pairing(mu, c.grad(mu), V)));
        ++checked;
      }
      out.require(w <= 1e-5, c.name + " d=" + std::to_string(d) + " error " + sci(w));
      worst = std::max(worst, w);
    }
    const KernelPtr k = make_kernel("cucker_smale", d, Params().set("beta", 0.5));
    const BasisPtr b = catalog::mixed_basis(d);
    const ControlField omega(b, Vector::LinSpaced(b->size(), -0.4, 0.6));
    for (const StateConstraint& c : catalog::constraint_families(d)) {
      const std::vector<StateConstraint> one{c};
      const Vector zeta = Vector::Ones(1);
      double w = 0.0;
      for (int trial = 0; trial < 20; ++trial) {
        const DiscreteMeasure mu = oracle::random_measure(rng, 10, d);
        const Matrix V = normal_field(rng, 10, d);
        auto F = [&](const DiscreteMeasure& m) { return penalized_constraint(0.3, m, zeta, *k, omega, one); };
        const double an = pairing(mu, grad_penalized_constraint(0.3, mu, zeta, *k, omega, one), V);
        w = std::max(w, rel(chainrule_fd_richardson(F, mu, V).extrapolated, an));
        ++checked;
      }
      out.require(w <= 1e-4, c.name() + "/penalized d=" + std::to_string(d) + " error " + sci(w));
      worst_pen = std::max(worst_pen, w);
    }
  }
  out.detail << (out.ok ? "" : "; ") << checked << " checks, max rel error " << sci(worst) << ", penalized "
             << sci(worst_pen);
}

void metric(Outcome& out) {
  std::mt19937_64 rng(1002);
  std::uniform_int_distribution<int> count(1, 12);
  double lp_gap = 0.0, axiom = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 1 + trial % 3;
    const DiscreteMeasure a = oracle::random_measure(rng, count(rng), d);
    const DiscreteMeasure b = oracle::random_measure(rng, count(rng), d);
    const DiscreteMeasure c = oracle::random_measure(rng, count(rng), d);
    for (int p : {1, 2}) {
      const double w = wasserstein(p, a, b);
      lp_gap = std::max(lp_gap, std::abs(w - oracle::wasserstein_lp(p, a, b)));
      axiom = std::max(axiom, wasserstein(p, a, a));
      axiom = std::max(axiom, std::abs(w - wasserstein(p, b, a)));
      axiom = std::max(axiom, w - wasserstein(p, a, c) - wasserstein(p, c, b));
    }
    axiom = std::max(axiom, wasserstein(1, a, b) - wasserstein(2, a, b));
  }
  // Equal-count uniform clouds go through the assignment path.
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    const DiscreteMeasure a = oracle::random_uniform_measure(rng, n, 2);
    const DiscreteMeasure b = oracle::random_uniform_measure(rng, n, 2);
    lp_gap = std::max(lp_gap, std::abs(wasserstein(2, a, b) - oracle::wasserstein_lp(2, a, b)));
  }
  out.require(lp_gap <= 1e-9, "LP mismatch " + sci(lp_gap));
  out.require(axiom <= 1e-9, "axiom violation " + sci(axiom));

  std::uniform_real_distribution<double> u(0.0, 1.0);
  double excess = -INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    const DiscreteMeasure mu = oracle::random_measure(rng, n, 1 + trial % 2);
    auto random_plan = [&](int m) {
      const DiscreteMeasure nu = oracle::random_measure(rng, m, mu.dim());
      Matrix j(n, m);
      for (int i = 0; i < n; ++i) {
        Vector row(m);
        for (int k = 0; k < m; ++k) row(k) = u(rng) + 0.01;
        j.row(i) = mu.weight(i) * row.transpose() / row.sum();
      }
      return Coupling(mu, DiscreteMeasure::normalized(nu.points(), j.colwise().sum().transpose()), j);
    };
    const DisintegrationBound bd = disintegration_bound_check(random_plan(3), random_plan(4));
    excess = std::max(excess, bd.lhs - bd.rhs);
  }
  out.require(excess <= 1e-9, "disintegration bound exceeded by " + sci(excess));
  out.detail << (out.ok ? "" : "; ") << "LP gap " << sci(lp_gap) << ", axioms " << sci(axiom)
             << ", disintegration max(lhs-rhs) " << sci(excess);
}

void flow(Outcome& out) {
  const double collapse = collapse_error(1000);
  out.require(collapse <= 1e-6, "collapse error " + sci(collapse));
  const double e1 = collapse_error(10), e2 = collapse_error(20), e3 = collapse_error(40);
  const double order = std::min(std::log2(e1 / e2), std::log2(e2 / e3));
  out.require(order >= 3.5, "observed order " + std::to_string(order));

  const KernelPtr k = make_kernel("cucker_smale", 2, Params().set("beta", 0.5));
  const BasisPtr b = std::make_shared<const ControlBasis>(
      2, std::vector<BasisFieldPtr>{make_basis_field("constant", 2, Params().set("direction", {1.0, 0.0})),
                                    make_basis_field("rotation", 2), make_basis_field("tanh", 2)});
  Matrix coef(2, 3);
  coef << 0.3, 0.4, -0.3, -0.2, 0.2, 0.5;
  const ControlLaw law(b, 1.0, coef, 2.0);
  const TimeGrid grid(1.0, 40);
  std::mt19937_64 rng(1003);
  const TrajectorySolution traj = solve_forward(oracle::random_measure(rng, 6, 2), *k, law, grid);
  double semigroup = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = oracle::random_points(rng, 1, 2, 1.5).row(0).transpose();
    const int r = trial, s = 10 + trial, t = 40 - trial;
    const Vector direct = flow_map(traj, *k, law, r, t, x);
    semigroup = std::max(semigroup, (direct - flow_map(traj, *k, law, s, t, flow_map(traj, *k, law, r, s, x))).norm());
  }
  out.require(semigroup <= 1e-8, "semigroup defect " + sci(semigroup));

  const KernelBounds kb = k->bounds();
  const double lu = 0.5 + 0.5;  // rotation and tanh Jacobian norms are at most 1
  const double contract = std::exp((kb.lipschitz_space + kb.lipschitz_measure + lu) * grid.horizon);
  double lo = INFINITY, hi = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const DiscreteMeasure mu = oracle::random_measure(rng, 6, 2);
    const DiscreteMeasure nu = oracle::random_measure(rng, 5, 2);
    const double ratio = wasserstein(1, solve_forward(mu, *k, law, grid).cloud(40),
                                     solve_forward(nu, *k, law, grid).cloud(40)) / wasserstein(1, mu, nu);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  out.require(std::isfinite(hi) && hi <= contract, "stability ratio " + sci(hi) + " above " + sci(contract));
  out.detail << (out.ok ? "" : "; ") << "collapse " << sci(collapse) << ", order " << order << ", semigroup "
             << sci(semigroup) << ", W1 ratio in [" << lo << ", " << hi << "] <= " << contract;
}

void needles(Outcome& out) {
  const cli::Scenario sc = cli::load_scenario_file(scenario_path("needle_interaction.json"));
  NeedlePackage pkg;
  for (const cli::NeedleSpec& n : sc.needles) {
    pkg.entries.push_back({ControlField(sc.basis, n.omega), sc.grid.node_at(n.tau), n.length});
  }
  out.require(pkg.entries.size() == 2, "scenario must carry a 2-needle package");
  const TrajectorySolution traj = solve_forward(sc.initial, *sc.kernel, *sc.law, sc.grid);
  const NeedleTable table = verify_first_order(traj, *sc.kernel, *sc.law, pkg, 3);
  out.require(table.rows.size() == 4, "expected e, e/2, e/4, e/8");
  bool strict = true;
  for (std::size_t k = 1; k < table.rows.size(); ++k) strict = strict && table.rows[k].ratio < table.rows[k - 1].ratio;
  out.require(strict && table.ratio_decreasing, "ratio not decreasing");

  const KernelPtr zero = make_kernel("zero", 1);
  const ControlLaw law = ControlLaw::constant(constant_basis_1d(), 1.0, Vector::Zero(1), 2.0);
  const TimeGrid grid(1.0, 64);
  const TrajectorySolution still = solve_forward(symmetric_pair(), *zero, law, grid);
  const ControlField omega(constant_basis_1d(), Vector::Constant(1, 1.5));
  const NeedleTable flat = verify_first_order(still, *zero, law, NeedlePackage{{{omega, 32, 0.25}, {omega, 64, 0.25}}}, 3);
  out.require(flat.max_residual <= 1e-9, "no-dynamics residual " + sci(flat.max_residual));

  out.detail << (out.ok ? "" : "; ") << "ratios";
  for (const NeedleResidual& r : table.rows) out.detail << " " << sci(r.ratio);
  out.detail << ", no-dynamics residual " << sci(flat.max_residual);
}

void lqr(Outcome& out) {
  const Solved s = solve("lqr.json");
  const double cost = objective_value(s.traj, *s.sc.law, s.sc.functionals);
  out.require(std::abs(cost - 0.25) <= 1e-10, "cost " + sci(cost));
  double costate = 0.0;
  for (const Matrix& r : s.costate.costates) costate = std::max(costate, std::abs(r(0, 0) + 0.5));
  out.require(costate <= 1e-10, "costate deviation " + sci(costate));
  const PMPCertificate cert = certify(s);
  double gap = 0.0;
  bool argmax = true;
  for (const NodeGap& g : cert.gaps) {
    gap = std::max(gap, g.gap);
    argmax = argmax && std::abs(s.sc.dictionary.at(g.argmax).coefficients()(0) + 0.5) <= 1e-12;
  }
  out.require(argmax, "a* = -0.5 does not win at every node");
  out.require(gap <= 1e-6, "gap " + sci(gap));
  out.require(cert.passed(), "certificate failed");
  out.detail << (out.ok ? "" : "; ") << "cost " << cost << ", costate deviation " << sci(costate) << ", max gap "
             << sci(gap) << " over " << cert.gaps.size() << " nodes";
}

double k_deviation(const Solved& s, int tau_count) {
  double dev = 0.0;
  for (const ControlField& omega : s.sc.dictionary) {
    for (int q = 0; q < tau_count; ++q) {
      const int tau = q * s.traj.grid.steps / tau_count;
      dev = std::max(dev, k_table(s.traj, s.costate, *s.sc.kernel, *s.sc.law, s.sc.multipliers, s.sc.functionals,
                                  omega, tau).max_deviation());
    }
  }
  return dev;
}

void k_functions(Outcome& out) {
  const Solved s = solve("lqr.json");
  const double dt = s.traj.grid.dt();
  const ControlField zero(s.sc.basis, Vector::Zero(1));
  double dev = 0.0, off = 0.0;
  for (int tau : {0, 25, 50, 75, 99}) {
    const KTable k = k_table(s.traj, s.costate, *s.sc.kernel, *s.sc.law, s.sc.multipliers, s.sc.functionals, zero, tau);
    dev = std::max(dev, k.max_deviation());
    for (double v : k.values) off = std::max(off, std::abs(v + 0.125));
  }
  out.require(dev <= 2 * dt, "LQR K deviation " + sci(dev));
  out.require(off <= 1e-3, "LQR K off -0.125 by " + sci(off));

  // Calibrate C on the coarse grid, then require the halved step to stay within C dt.
  // Exactly constant K leaves only round-off, hence the absolute allowance.
  const double roundoff = 1e-12;
  std::ostringstream cal;
  for (const char* name : {"state_constrained.json", "k_interaction.json"}) {
    const Solved coarse = solve(name);
    cli::Overrides ov;
    ov.dt = coarse.traj.grid.dt() / 2;
    const Solved fine = solve(name, ov);
    const double c = k_deviation(coarse, 4) / coarse.traj.grid.dt();
    const double fine_dev = k_deviation(fine, 4);
    out.require(fine_dev <= c * fine.traj.grid.dt() + roundoff,
                std::string(name) + " K deviation " + sci(fine_dev) + " above C dt = " + sci(c * fine.traj.grid.dt()));
    cal << ", " << name << " C " << sci(c) << " fine dev " << sci(fine_dev);
  }

  const Solved sc = solve("state_constrained.json");
  double terminal = -INFINITY;
  for (const ControlField& omega : sc.sc.dictionary) {
    for (int tau : {0, 25, 50, 75, 100}) {
      terminal = std::max(terminal, k_table(sc.traj, sc.costate, *sc.sc.kernel, *sc.sc.law, sc.sc.multipliers,
                                            sc.sc.functionals, omega, tau).terminal());
    }
  }
  out.require(terminal <= 1e-8, "state-constrained K(T) = " + sci(terminal));
  out.detail << (out.ok ? "" : "; ") << "LQR deviation " << sci(dev) << " (2dt " << sci(2 * dt) << "), |K+0.125| "
             << sci(off) << cal.str() << ", max K(T) " << sci(terminal);
}

void negatives(Outcome& out) {
  const std::pair<const char*, const char*> cases[] = {{"lqr_flipped.json", violation::kMaximization},
                                                       {"lqr_zero_multipliers.json", violation::kNonDegeneracy},
                                                       {"lqr_inactive_support.json", violation::kSupportSlackness}};
  for (const auto& [name, category] : cases) {
    const PMPCertificate cert = certify(solve(name));
    out.require(!cert.passed(), std::string(name) + " passed");
    out.require(cert.has_violation(category), std::string(name) + " lacks " + category);
    out.detail << (out.detail.tellp() > 0 ? ", " : "") << name << " ->";
    for (const std::string& v : cert.violations) out.detail << " " << v;
  }
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<void(Outcome&)> run;
  };
  const Criterion criteria[] = {{1, "gradient chainrule suite", 10.0, gradients},
                                {2, "metric suite", 30.0, metric},
                                {3, "flow suite", 30.0, flow},
                                {4, "needle suite", 60.0, needles},
                                {5, "LQR reduction", 5.0, lqr},
                                {6, "K-function suite", 60.0, k_functions},
                                {7, "certificate negative tests", 10.0, negatives}};
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.require(seconds <= c.limit_seconds, "runtime over " + std::to_string(c.limit_seconds) + " s");
    if (!out.ok) ++failed;
    std::printf("criterion %d %-28s %s  [%.2f s / %.0f s]  %s\n", c.id, c.name, out.ok ? "PASS" : "FAIL", seconds,
                c.limit_seconds, out.detail.str().c_str());
  }
  std::printf("%d/7 criteria passed\n", 7 - failed);
  return failed == 0 ? 0 : 1;
}
