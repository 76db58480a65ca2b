#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include "wpmp/cli.hpp"

namespace wpmp::cli {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6e", x);
  return buf;
}

std::filesystem::path prepare_out(const std::string& out_dir) {
  const std::filesystem::path p(out_dir.empty() ? "." : out_dir);
  std::filesystem::create_directories(p);
  return p;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

// Maps exceptions to exit statuses.
template <class Body>
int guarded(std::ostream& log, Body&& body) {
  try {
    return body();
  } catch (const NumericalError& e) {
    log << "error: numerical blow-up: " << e.what() << "\n";
    return kBlowUp;
  } catch (const json::exception& e) {
    log << "error: scenario parse error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::logic_error& e) {
    log << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

struct GradCheckRow {
  std::string name;
  double analytic;
  double numeric;
  double error;
  double tolerance;
};

GradCheckRow grad_row(const std::string& name, const MeasureFunctional& F, const DiscreteMeasure& mu,
                      const Matrix& grad, const Matrix& V, double tolerance) {
  const double an = gradient_pairing(mu, grad, V);
  const double fd = chainrule_fd_richardson(F, mu, V).extrapolated;
  return {name, an, fd, std::abs(fd - an) / (1.0 + std::abs(an)), tolerance};
}

}  // namespace

json certificate_to_json(const PMPCertificate& cert, const TimeGrid& grid) {
  json j;
  j["passed"] = cert.passed();
  j["violations"] = cert.violations;
  j["nondegenerate"] = cert.nondegenerate;
  json gaps = json::array();
  bool max_ok = true;
  for (const NodeGap& g : cert.gaps) {
    gaps.push_back({{"node", g.node},
                    {"t", g.time},
                    {"h_reference", g.h_reference},
                    {"h_best", g.h_best},
                    {"argmax", g.argmax},
                    {"gap", g.gap},
                    {"tolerance", g.tolerance},
                    {"state_atom", g.has_state_atom},
                    {"ok", g.ok}});
    max_ok = max_ok && g.ok;
  }
  j["maximization"] = {{"ok", max_ok}, {"nodes", gaps}};
  j["inequality_slackness"] = cert.inequality_slackness;
  j["support_slackness"] = cert.support_slackness;
  json ks = json::array();
  for (const KReport& r : cert.k_reports) {
    ks.push_back({{"dictionary_index", r.dictionary_index},
                  {"tau", grid.time(r.table.tau)},
                  {"tau_node", r.table.tau},
                  {"values", r.table.values},
                  {"max_deviation", r.table.max_deviation()},
                  {"terminal", r.table.terminal()},
                  {"sign_ok", r.sign_ok}});
  }
  j["k_tables"] = ks;
  return j;
}

int cmd_simulate(const std::string& scenario, const std::string& out_dir, const Overrides& ov, std::ostream& log) {
  return guarded(log, [&] {
    const Scenario sc = load_scenario_file(scenario, ov);
    const TrajectorySolution traj = solve_forward(sc.initial, *sc.kernel, *sc.law, sc.grid);
    const std::filesystem::path out = prepare_out(out_dir);
    {
      std::ofstream f(out / "trajectory.csv");
      if (!f) throw InvalidArgument("cannot write trajectory.csv");
      write_trajectory_csv(f, traj);
    }
    double radius = 0.0;
    for (int n = 0; n <= sc.grid.steps; ++n) radius = std::max(radius, support_radius(traj.cloud(n)));
    const double cost = objective_value(traj, *sc.law, sc.functionals);
    write_json(out / "summary.json", {{"seed", sc.seed},
                                      {"steps", sc.grid.steps},
                                      {"dt", sc.grid.dt()},
                                      {"atoms", traj.atoms()},
                                      {"support_radius", radius},
                                      {"final_support_radius", support_radius(traj.cloud(sc.grid.steps))},
                                      {"gronwall_radius", traj.gronwall_radius},
                                      {"cost", cost}});
    log << "simulate: " << traj.atoms() << " atoms, " << sc.grid.steps << " steps, support radius " << fmt(radius)
        << ", cost " << fmt(cost) << "\n";
    return static_cast<int>(kPass);
  });
}

int cmd_gradcheck(const std::string& scenario, const Overrides& ov, std::ostream& log) {
  return guarded(log, [&] {
    const Scenario sc = load_scenario_file(scenario, ov);
    const DiscreteMeasure& mu = sc.initial;
    const ProblemFunctionals& fns = sc.functionals;
    std::mt19937_64 rng(sc.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix V(mu.size(), mu.dim());
    for (Eigen::Index i = 0; i < V.size(); ++i) V(i) = normal(rng);

    std::vector<GradCheckRow> rows;
    auto terminal = [&](const TerminalFunctional& phi) {
      rows.push_back(grad_row(phi.name(), [&](const DiscreteMeasure& m) { return phi.value(m); }, mu,
                              phi.gradient(mu), V, 1e-5));
    };
    if (fns.terminal) terminal(*fns.terminal);
    for (const TerminalFunctional& f : fns.inequality) terminal(f);
    for (const TerminalFunctional& f : fns.equality) terminal(f);
    const double t0 = 0.0;
    const ControlField u0 = sc.law->field_at(t0);
    if (fns.running) {
      const RunningCost& L = *fns.running;
      rows.push_back(grad_row(L.name(), [&](const DiscreteMeasure& m) { return L.value(t0, m, u0); }, mu,
                              L.gradient(t0, mu, u0), V, 1e-5));
    }
    for (const StateConstraint& c : fns.state) {
      rows.push_back(grad_row(c.name(), [&](const DiscreteMeasure& m) { return eval_constraint(c, t0, m); }, mu,
                              grad_constraint(c, t0, mu), V, 1e-5));
      const std::vector<StateConstraint> one{c};
      const Vector zeta = Vector::Ones(1);
      rows.push_back(grad_row(
          c.name() + "/penalized",
          [&](const DiscreteMeasure& m) { return penalized_constraint(t0, m, zeta, *sc.kernel, u0, one); }, mu,
          grad_penalized_constraint(t0, mu, zeta, *sc.kernel, u0, one), V, 1e-4));
    }
    if (rows.empty()) throw InvalidArgument("gradcheck: scenario declares no functionals");

    bool ok = true;
    log << "functional,analytic,fd,rel_error,tolerance,status\n";
    for (const GradCheckRow& r : rows) {
      const bool pass = r.error <= r.tolerance;
      ok = ok && pass;
      log << r.name << "," << fmt(r.analytic) << "," << fmt(r.numeric) << "," << fmt(r.error) << ","
          << fmt(r.tolerance) << "," << (pass ? "ok" : "FAIL") << "\n";
    }
    if (!ok) {
      log << "gradcheck failed for:";
      for (const GradCheckRow& r : rows)
        if (r.error > r.tolerance) log << " " << r.name;
      log << "\n";
    }
    return static_cast<int>(ok ? kPass : kGateFail);
  });
}

int cmd_pmp_check(const std::string& scenario, const std::string& out_dir, const Overrides& ov, std::ostream& log) {
  return guarded(log, [&] {
    const Scenario sc = load_scenario_file(scenario, ov);
    if (sc.dictionary.empty()) throw InvalidArgument("pmp-check: scenario declares no dictionary");
    const TrajectorySolution traj = solve_forward(sc.initial, *sc.kernel, *sc.law, sc.grid);
    StateCostateCloud costate = solve_costate_backward(traj, *sc.kernel, *sc.law, sc.multipliers, sc.functionals);
    if (sc.costate_sign != 1.0) {
      for (Matrix& r : costate.costates) r *= sc.costate_sign;
    }
    const PMPCertificate cert = check_certificate(traj, costate, *sc.kernel, *sc.law, sc.multipliers, sc.functionals,
                                                  sc.dictionary, sc.certificate);
    json report = certificate_to_json(cert, sc.grid);
    report["seed"] = sc.seed;
    report["cost"] = objective_value(traj, *sc.law, sc.functionals);
    write_json(prepare_out(out_dir) / "certificate.json", report);

    double worst = -INFINITY;
    for (const NodeGap& g : cert.gaps) worst = std::max(worst, g.gap);
    log << "pmp-check: max gap " << fmt(worst) << ", " << cert.k_reports.size() << " K tables, "
        << (cert.passed() ? "pass" : "FAIL");
    for (const std::string& v : cert.violations) log << " [" << v << "]";
    log << "\n";
    return static_cast<int>(cert.passed() ? kPass : kGateFail);
  });
}

int cmd_needle_check(const std::string& scenario, const Overrides& ov, std::ostream& log) {
  return guarded(log, [&] {
    const Scenario sc = load_scenario_file(scenario, ov);
    if (sc.needles.empty()) throw InvalidArgument("needle-check: scenario declares no needles");
    NeedlePackage pkg;
    for (const NeedleSpec& n : sc.needles) {
      pkg.entries.push_back({ControlField(sc.basis, n.omega), sc.grid.node_at(n.tau), n.length});
    }
    const TrajectorySolution traj = solve_forward(sc.initial, *sc.kernel, *sc.law, sc.grid);
    const NeedleTable table = verify_first_order(traj, *sc.kernel, *sc.law, pkg, sc.halvings);
    log << "scale,norm_e,residual,ratio\n";
    for (const NeedleResidual& r : table.rows) {
      log << fmt(r.scale) << "," << fmt(r.norm_e) << "," << fmt(r.residual) << "," << fmt(r.ratio) << "\n";
    }
    log << "needle-check: ratio " << (table.ratio_decreasing ? "decreasing" : "NOT decreasing") << "\n";
    return static_cast<int>(table.ratio_decreasing ? kPass : kGateFail);
  });
}

}  // namespace wpmp::cli
