#include "particle_ops.hpp"

namespace wpmp {

namespace {

struct StageCoefficients {
  std::vector<Matrix> a;      // D_x(v + u) per row
  std::vector<Matrix> gamma;  // D_yH(at_i, cloud_j), row-major; empty when uncoupled
};

// Y' = A_i Y_i (+ sum_j w_j Gamma_ij Y_j) over one step with precomputed stage coefficients.
Matrix linear_step(const Matrix& y0, double h, const std::array<StageCoefficients, 4>& coef, const Vector& w) {
  const Eigen::Index n = y0.rows();
  return detail::rk4_step(y0, h, [&](int k, const Matrix& y) {
    const StageCoefficients& c = coef[static_cast<std::size_t>(k)];
    Matrix out(n, y.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector r = c.a[static_cast<std::size_t>(i)] * y.row(i).transpose();
      if (!c.gamma.empty()) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (w(j) != 0.0) r += w(j) * (c.gamma[static_cast<std::size_t>(i * n + j)] * y.row(j).transpose());
        }
      }
      out.row(i) = r.transpose();
    }
    return out;
  });
}

void require_finite(const Matrix& m, const char* what, int step) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite values at step " +
                                               std::to_string(step), step);
}

// Coupled linear system along the stored atoms, from node `start` to the final node.
AtomPaths propagate_atoms(const TrajectorySolution& traj, const InteractionKernel& kernel, const ControlLaw& law,
                          int start, const Matrix& y0, bool coupled, const char* what) {
  AtomPaths out;
  out.start = start;
  out.values.push_back(y0);
  const Vector& w = traj.weights;
  for (int n = start; n < traj.grid.steps; ++n) {
    const ControlField u = law.field_in_cell(traj.step_cell[static_cast<std::size_t>(n)]);
    const detail::StepStages st = detail::forward_stages(traj, n);
    std::array<StageCoefficients, 4> coef;
    for (std::size_t k = 0; k < 4; ++k) {
      coef[k].a = detail::velocity_jacobians(kernel, st.times[k], *st.clouds[k], w, u, *st.clouds[k]);
      if (coupled) coef[k].gamma = detail::gamma_table(kernel, st.times[k], *st.clouds[k], *st.clouds[k]);
    }
    out.values.push_back(linear_step(out.values.back(), traj.grid.dt(), coef, w));
    require_finite(out.values.back(), what, n);
  }
  return out;
}

void check_node(const TrajectorySolution& traj, int s, const char* what) {
  if (s < 0 || s > traj.grid.steps) throw InvalidArgument(std::string(what) + ": node out of range");
}

}  // namespace

NodePath solve_linearized_classical(const TrajectorySolution& traj, const InteractionKernel& kernel,
                                    const ControlLaw& law, int s, const Vector& x, const Vector& h) {
  check_node(traj, s, "solve_linearized_classical");
  require_dim(traj.dim(), x.size(), "solve_linearized_classical point");
  require_dim(traj.dim(), h.size(), "solve_linearized_classical direction");
  const Vector& w = traj.weights;
  const double dt = traj.grid.dt();

  NodePath out;
  out.start = s;
  out.values.push_back(h);
  Matrix y = x.transpose();
  Matrix z = h.transpose();
  for (int n = s; n < traj.grid.steps; ++n) {
    const ControlField u = law.field_in_cell(traj.step_cell[static_cast<std::size_t>(n)]);
    const detail::StepStages st = detail::forward_stages(traj, n);
    std::array<Matrix, 3> ys;
    const Matrix y_next = detail::rk4_step(
        y, dt,
        [&](int k, const Matrix& p) {
          return detail::total_velocity(kernel, st.times[static_cast<std::size_t>(k)],
                                        *st.clouds[static_cast<std::size_t>(k)], w, u, p);
        },
        &ys);
    const std::array<const Matrix*, 4> at{&y, &ys[0], &ys[1], &ys[2]};
    std::array<StageCoefficients, 4> coef;
    for (std::size_t k = 0; k < 4; ++k) {
      coef[k].a = detail::velocity_jacobians(kernel, st.times[k], *st.clouds[k], w, u, *at[k]);
    }
    z = linear_step(z, dt, coef, w);
    require_finite(z, "solve_linearized_classical", n);
    y = y_next;
    out.values.push_back(z.row(0).transpose());
  }
  return out;
}

NonlocalLinearization solve_linearized_nonlocal(const TrajectorySolution& traj, const InteractionKernel& kernel,
                                                const ControlLaw& law, int s, const Matrix& V) {
  check_node(traj, s, "solve_linearized_nonlocal");
  require_dim(traj.atoms(), V.rows(), "solve_linearized_nonlocal field rows");
  require_dim(traj.dim(), V.cols(), "solve_linearized_nonlocal field columns");
  NonlocalLinearization out;
  out.classical = propagate_atoms(traj, kernel, law, s, V, false, "solve_linearized_nonlocal");
  // The total perturbation D_xPhi V + w solves the coupled system with initial value V.
  const AtomPaths total = propagate_atoms(traj, kernel, law, s, V, true, "solve_linearized_nonlocal");
  out.nonlocal.start = s;
  for (std::size_t k = 0; k < total.values.size(); ++k) {
    out.nonlocal.values.push_back(total.values[k] - out.classical.values[k]);
  }
  return out;
}

AtomPaths solve_needle_linearization(const TrajectorySolution& traj, const InteractionKernel& kernel,
                                     const ControlLaw& law, const ControlField& omega, int tau) {
  check_node(traj, tau, "solve_needle_linearization");
  require_dim(traj.dim(), omega.dim(), "solve_needle_linearization field");
  const ControlField u = law.field_at(traj.grid.time(tau));
  const Matrix& x = traj.nodes[static_cast<std::size_t>(tau)];
  Matrix f0(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector p = x.row(i).transpose();
    f0.row(i) = (omega.value(p) - u.value(p)).transpose();
  }
  return propagate_atoms(traj, kernel, law, tau, f0, true, "solve_needle_linearization");
}

}  // namespace wpmp
