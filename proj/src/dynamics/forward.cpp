#include <cmath>
#include <cstdio>
#include <ostream>

#include "particle_ops.hpp"

namespace wpmp {

TimeGrid::TimeGrid(double horizon_, int steps_) : horizon(horizon_), steps(steps_) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("TimeGrid: horizon must be positive");
  if (steps < 1) throw InvalidArgument("TimeGrid: steps must be at least 1");
}

double TimeGrid::time(int node) const {
  if (node < 0 || node > steps) throw InvalidArgument("TimeGrid: node " + std::to_string(node) + " out of range");
  return node == steps ? horizon : node * dt();
}

int TimeGrid::node_at(double t) const {
  const double s = t / dt();
  const double n = std::round(s);
  if (std::abs(s - n) > 1e-9 || n < 0 || n > steps) {
    throw InvalidArgument("time " + std::to_string(t) + " is not a grid node");
  }
  return static_cast<int>(n);
}

DiscreteMeasure TrajectorySolution::cloud(int node) const {
  if (node < 0 || node > grid.steps) throw InvalidArgument("TrajectorySolution: node out of range");
  return DiscreteMeasure(nodes[static_cast<std::size_t>(node)], weights);
}

namespace {

void check_alignment(const ControlLaw& law, const TimeGrid& grid, int dim) {
  require_dim(dim, law.dim(), "control law");
  if (std::abs(law.horizon() - grid.horizon) > 1e-12 * grid.horizon) {
    throw InvalidArgument("control horizon differs from the time grid horizon");
  }
  if (grid.steps % law.cells() != 0) {
    throw InvalidArgument("control cells (" + std::to_string(law.cells()) + ") must divide grid steps (" +
                          std::to_string(grid.steps) + ")");
  }
}

void check_compatible(const TrajectorySolution& traj, const InteractionKernel& kernel, const ControlLaw& law) {
  require_dim(traj.dim(), kernel.dim(), "kernel");
  check_alignment(law, traj.grid, traj.dim());
  if (traj.step_cell.back() != law.cells() - 1) {
    throw InvalidArgument("control law cell layout differs from the one used for the trajectory");
  }
}

}  // namespace

TrajectorySolution solve_forward(const DiscreteMeasure& mu0, const InteractionKernel& kernel,
                                 const ControlLaw& law, const TimeGrid& grid) {
  require_dim(kernel.dim(), mu0.dim(), "solve_forward initial measure");
  check_alignment(law, grid, mu0.dim());

  TrajectorySolution traj{grid, mu0.weights(), {}, {}, {}, {}, {}, 0.0, 0.0};
  traj.nodes.reserve(static_cast<std::size_t>(grid.steps + 1));
  traj.nodes.push_back(mu0.points());
  const int per_cell = grid.steps / law.cells();
  const double dt = grid.dt();
  const Vector& w = traj.weights;

  for (int n = 0; n < grid.steps; ++n) {
    const int cell = n / per_cell;
    const ControlField u = law.field_in_cell(cell);
    const double t = grid.time(n);
    const std::array<double, 4> times{t, t + 0.5 * dt, t + 0.5 * dt, t + dt};
    Matrix start;
    std::array<Matrix, 3> st;
    const Matrix next = detail::rk4_step(
        traj.nodes.back(), dt,
        [&](int stage, const Matrix& x) {
          Matrix vel = detail::total_velocity(kernel, times[static_cast<std::size_t>(stage)], x, w, u, x);
          if (stage == 0) start = vel;
          return vel;
        },
        &st);
    if (!next.allFinite()) {
      throw NumericalError("non-finite particle state at step " + std::to_string(n) + " (t=" +
                               std::to_string(t + dt) + ")",
                           n);
    }
    traj.step_cell.push_back(cell);
    traj.stages.push_back(std::move(st));
    traj.start_velocity.push_back(std::move(start));
    traj.end_velocity.push_back(detail::total_velocity(kernel, grid.time(n + 1), next, w, u, next));
    traj.nodes.push_back(next);
  }

  const KernelBounds b = kernel.bounds();
  const double r0 = support_radius(mu0);
  traj.gronwall_radius = (1.0 + r0) * std::exp((2.0 * b.sublinearity + law.bound()) * grid.horizon) - 1.0;
  double observed = 0.0;
  for (const Matrix& x : traj.nodes) observed = std::max(observed, x.rowwise().norm().maxCoeff());
  traj.radius_bound = std::max(traj.gronwall_radius, observed);
  return traj;
}

void write_trajectory_csv(std::ostream& out, const TrajectorySolution& traj) {
  char buf[32];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << buf;
  };
  out << "t,atom_id,w";
  for (int k = 0; k < traj.dim(); ++k) out << ",x" << (k + 1);
  out << "\n";
  for (int n = 0; n <= traj.grid.steps; ++n) {
    const Matrix& x = traj.nodes[static_cast<std::size_t>(n)];
    for (int i = 0; i < traj.atoms(); ++i) {
      put(traj.grid.time(n));
      out << "," << i << ",";
      put(traj.weights(i));
      for (int k = 0; k < traj.dim(); ++k) {
        out << ",";
        put(x(i, k));
      }
      out << "\n";
    }
  }
}

Vector flow_map(const TrajectorySolution& traj, const InteractionKernel& kernel, const ControlLaw& law, int s,
                int t, const Vector& x, Diagnostics* diag) {
  check_compatible(traj, kernel, law);
  require_dim(traj.dim(), x.size(), "flow_map point");
  const int steps = traj.grid.steps;
  if (s < 0 || s > steps || t < 0 || t > steps) throw InvalidArgument("flow_map: node out of range");
  if (diag != nullptr && x.norm() > traj.radius_bound) {
    diag->warn("flow_map: start point lies outside the trajectory radius bound");
  }
  Matrix y = x.transpose();
  const Vector& w = traj.weights;
  const double dt = traj.grid.dt();
  if (t >= s) {
    for (int n = s; n < t; ++n) {
      const ControlField u = law.field_in_cell(traj.step_cell[static_cast<std::size_t>(n)]);
      const detail::StepStages st = detail::forward_stages(traj, n);
      y = detail::rk4_step(y, dt, [&](int k, const Matrix& p) {
        return detail::total_velocity(kernel, st.times[static_cast<std::size_t>(k)],
                                      *st.clouds[static_cast<std::size_t>(k)], w, u, p);
      });
    }
  } else {
    for (int n = s - 1; n >= t; --n) {
      const ControlField u = law.field_in_cell(traj.step_cell[static_cast<std::size_t>(n)]);
      const Matrix& lo = traj.nodes[static_cast<std::size_t>(n)];
      const Matrix& hi = traj.nodes[static_cast<std::size_t>(n + 1)];
      const Matrix mid = 0.5 * (lo + hi);
      const double t1 = traj.grid.time(n + 1);
      const std::array<double, 4> times{t1, t1 - 0.5 * dt, t1 - 0.5 * dt, traj.grid.time(n)};
      const std::array<const Matrix*, 4> clouds{&hi, &mid, &mid, &lo};
      y = detail::rk4_step(y, -dt, [&](int k, const Matrix& p) {
        return detail::total_velocity(kernel, times[static_cast<std::size_t>(k)],
                                      *clouds[static_cast<std::size_t>(k)], w, u, p);
      });
    }
  }
  if (!y.allFinite()) throw NumericalError("flow_map: non-finite characteristic", -1);
  return y.row(0).transpose();
}

}  // namespace wpmp
