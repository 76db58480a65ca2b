#include <cmath>

#include "particle_ops.hpp"

namespace wpmp {

namespace {

int length_in_steps(double length, const TimeGrid& grid) {
  if (!(length >= 0.0)) throw InvalidArgument("needle length must be nonnegative");
  const double s = length / grid.dt();
  const double n = std::round(s);
  if (std::abs(s - n) > 1e-9 * std::max(1.0, s)) {
    throw InvalidArgument("needle length " + std::to_string(length) + " is not a multiple of dt = " +
                          std::to_string(grid.dt()));
  }
  return static_cast<int>(n);
}

}  // namespace

void validate_needles(const NeedlePackage& pkg, const TimeGrid& grid) {
  std::vector<std::pair<int, int>> windows;
  for (const NeedleEntry& e : pkg.entries) {
    if (e.node < 0 || e.node > grid.steps) throw InvalidArgument("needle node out of range");
    const int m = length_in_steps(e.length, grid);
    if (e.node - m < 0) throw InvalidArgument("needle interval starts before t = 0");
    windows.emplace_back(e.node - m, e.node);
  }
  for (std::size_t a = 0; a < windows.size(); ++a) {
    for (std::size_t b = a + 1; b < windows.size(); ++b) {
      if (windows[a].first <= windows[b].second && windows[b].first <= windows[a].second) {
        throw InvalidArgument("needle intervals " + std::to_string(a) + " and " + std::to_string(b) + " overlap");
      }
    }
  }
}

ControlLaw apply_needle(const ControlLaw& law, const NeedlePackage& pkg, const TimeGrid& grid) {
  validate_needles(pkg, grid);
  ControlLaw out = law.refined(grid.steps);
  for (const NeedleEntry& e : pkg.entries) {
    if (e.omega.basis()->size() != law.basis()->size()) {
      throw InvalidArgument("needle field is not expressed in the control basis");
    }
    const int m = length_in_steps(e.length, grid);
    for (int n = e.node - m; n < e.node; ++n) out = out.with_cell(n, e.omega.coefficients());
  }
  return out;
}

NeedleTable verify_first_order(const TrajectorySolution& traj, const InteractionKernel& kernel,
                               const ControlLaw& law, const NeedlePackage& pkg, int halvings) {
  if (halvings < 0) throw InvalidArgument("verify_first_order: halvings must be nonnegative");
  const TimeGrid& grid = traj.grid;
  validate_needles(pkg, grid);
  const DiscreteMeasure mu0 = traj.cloud(0);

  std::vector<AtomPaths> F;
  for (const NeedleEntry& e : pkg.entries) {
    F.push_back(solve_needle_linearization(traj, kernel, law, e.omega, e.node));
  }

  NeedleTable table;
  double scale = 1.0;
  for (int h = 0; h <= halvings; ++h, scale *= 0.5) {
    NeedlePackage scaled = pkg;
    double norm_sq = 0.0;
    for (NeedleEntry& e : scaled.entries) {
      e.length *= scale;
      norm_sq += e.length * e.length;
    }
    const TrajectorySolution perturbed = solve_forward(mu0, kernel, apply_needle(law, scaled, grid), grid);

    double residual = 0.0;
    for (int n = 0; n <= grid.steps; ++n) {
      bool inside = false;
      Matrix predicted = traj.nodes[static_cast<std::size_t>(n)];
      for (std::size_t k = 0; k < scaled.entries.size(); ++k) {
        const NeedleEntry& e = scaled.entries[k];
        if (n > e.node - length_in_steps(e.length, grid) && n < e.node) inside = true;
        if (n >= e.node) predicted += e.length * F[k].at(n);
      }
      if (inside) continue;
      residual = std::max(residual,
                          (perturbed.nodes[static_cast<std::size_t>(n)] - predicted).rowwise().norm().maxCoeff());
    }
    const double norm_e = std::sqrt(norm_sq);
    table.rows.push_back({scale, norm_e, residual, norm_e > 0.0 ? residual / norm_e : 0.0});
    table.max_residual = std::max(table.max_residual, residual);
  }
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    const bool decreasing = table.rows[k].ratio < table.rows[k - 1].ratio || table.rows[k].ratio == 0.0;
    if (!decreasing) table.ratio_decreasing = false;
  }
  return table;
}

}  // namespace wpmp
