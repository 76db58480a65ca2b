#pragma once

#include <array>
#include <iosfwd>

#include "wpmp/fields.hpp"

namespace wpmp {

struct TimeGrid {
  TimeGrid(double horizon, int steps);

  double horizon;
  int steps;
  double dt() const { return horizon / steps; }
  double time(int node) const;
  /// Node index for a time that lies on the grid; throws otherwise.
  int node_at(double t) const;
};

/// Particle trajectory of the controlled non-local continuity equation.
/// Atom i keeps its index and weight at every node.
struct TrajectorySolution {
  TimeGrid grid;
  Vector weights;
  /// steps + 1 matrices, rows are atoms.
  std::vector<Matrix> nodes;
  /// Per step: positions at RK4 stages 2, 3 and 4.
  std::vector<std::array<Matrix, 3>> stages;
  /// Per step: total velocity v + u at the step's start and end nodes, using the step's control cell.
  std::vector<Matrix> start_velocity;
  std::vector<Matrix> end_velocity;
  /// Per step: control cell index.
  std::vector<int> step_cell;
  /// (1 + R0) exp((2M + L_U) T) - 1.
  double gronwall_radius = 0.0;
  /// max(gronwall_radius, observed support radius).
  double radius_bound = 0.0;

  int atoms() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(nodes.front().cols()); }
  DiscreteMeasure cloud(int node) const;
};

TrajectorySolution solve_forward(const DiscreteMeasure& mu0, const InteractionKernel& kernel,
                                 const ControlLaw& law, const TimeGrid& grid);

/// CSV with columns t, atom_id, w, x1..xd; one row per atom per node.
void write_trajectory_csv(std::ostream& out, const TrajectorySolution& traj);

/// Phi_{(s,t)}(x) through the frozen mean field of `traj`. Backward flows use
/// linear interpolation of node positions inside a step.
Vector flow_map(const TrajectorySolution& traj, const InteractionKernel& kernel, const ControlLaw& law, int s,
                int t, const Vector& x, Diagnostics* diag = nullptr);

/// Values at nodes start, start+1, ..., steps.
struct NodePath {
  int start = 0;
  std::vector<Vector> values;
  const Vector& at(int node) const { return values.at(static_cast<std::size_t>(node - start)); }
};

/// w' = D_x(v + u)(t, Phi_{(s,t)}(x)) w, w(s) = h.
NodePath solve_linearized_classical(const TrajectorySolution& traj, const InteractionKernel& kernel,
                                    const ControlLaw& law, int s, const Vector& x, const Vector& h);

/// Per-node matrices (rows are atoms) from node `start` to the final node.
struct AtomPaths {
  int start = 0;
  std::vector<Matrix> values;
  const Matrix& at(int node) const { return values.at(static_cast<std::size_t>(node - start)); }
};

struct NonlocalLinearization {
  /// D_x Phi_{(s,t)}(x_i) V_i.
  AtomPaths classical;
  /// w(t, x_i), zero at s.
  AtomPaths nonlocal;
};

/// Coupled linearization w' = D_x v w + sum_j w_j Gamma^v(x_i, x_j)(D_x Phi V + w)_j, w(s) = 0.
NonlocalLinearization solve_linearized_nonlocal(const TrajectorySolution& traj, const InteractionKernel& kernel,
                                                const ControlLaw& law, int s, const Matrix& V);

struct NeedleEntry {
  ControlField omega;
  int node;       // tau_k
  double length;  // e_k, a multiple of dt
};

struct NeedlePackage {
  std::vector<NeedleEntry> entries;
};

/// Checks lengths are nonnegative multiples of dt inside [0, T] and that the
/// closed intervals [tau_k - e_k, tau_k] are pairwise disjoint.
void validate_needles(const NeedlePackage& pkg, const TimeGrid& grid);

/// Law equal to omega_k on [tau_k - e_k, tau_k] and `law` elsewhere, on grid-resolution cells.
ControlLaw apply_needle(const ControlLaw& law, const NeedlePackage& pkg, const TimeGrid& grid);

/// F' = D_x(u + v) F + sum_j w_j Gamma^v(x_i, x_j) F_j with F(tau) = omega - u(tau, .) at the atoms.
AtomPaths solve_needle_linearization(const TrajectorySolution& traj, const InteractionKernel& kernel,
                                     const ControlLaw& law, const ControlField& omega, int tau);

struct NeedleResidual {
  double scale;
  double norm_e;
  double residual;
  double ratio;  // residual / |e|
};

struct NeedleTable {
  std::vector<NeedleResidual> rows;
  bool ratio_decreasing = true;
  double max_residual = 0.0;
};

/// Runs the package at e, e/2, ..., e/2^halvings and compares perturbed
/// positions with x + sum_{tau_k <= t} e_k F_k at nodes outside the open needle windows.
NeedleTable verify_first_order(const TrajectorySolution& traj, const InteractionKernel& kernel,
                               const ControlLaw& law, const NeedlePackage& pkg, int halvings);

}  // namespace wpmp
