#include "../dynamics/particle_ops.hpp"
#include "wpmp/pmp.hpp"

namespace wpmp {

DiscreteMeasure StateCostateCloud::marginal(int node) const {
  if (node < 0 || node > grid.steps) throw InvalidArgument("StateCostateCloud: node out of range");
  return DiscreteMeasure(positions[static_cast<std::size_t>(node)], weights);
}

namespace {

struct StageData {
  Matrix source;
  std::vector<Matrix> a;
  std::vector<Matrix> gamma;
};

StageData stage_data(double t, const Matrix& x, const Vector& w, const InteractionKernel& kernel,
                     const ControlField& u, const MultiplierSet& mults, const ProblemFunctionals& fns,
                     const Vector& zeta) {
  const DiscreteMeasure mu(x, w);
  StageData s;
  s.source = Matrix::Zero(x.rows(), x.cols());
  if (fns.running && mults.lambda0 != 0.0) s.source += mults.lambda0 * fns.running->gradient(t, mu, u);
  if (!fns.state.empty()) s.source += grad_penalized_constraint(t, mu, zeta, kernel, u, fns.state);
  s.a = detail::velocity_jacobians(kernel, t, x, w, u, x);
  s.gamma = detail::gamma_table(kernel, t, x, x);
  return s;
}

Matrix costate_rhs(const StageData& s, const Matrix& r, const Vector& w) {
  const Eigen::Index n = r.rows();
  Matrix out = s.source;
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector acc = s.a[static_cast<std::size_t>(i)].transpose() * r.row(i).transpose();
    if (!s.gamma.empty()) {
      // Gamma^v_{(x_j)}(x_i) = D_yH(x_j, x_i) sits at gamma[j * n + i].
      for (Eigen::Index j = 0; j < n; ++j) {
        if (w(j) != 0.0) acc += w(j) * (s.gamma[static_cast<std::size_t>(j * n + i)].transpose() * r.row(j).transpose());
      }
    }
    out.row(i) -= acc.transpose();
  }
  return out;
}

}  // namespace

StateCostateCloud solve_costate_backward(const TrajectorySolution& traj, const InteractionKernel& kernel,
                                         const ControlLaw& law, const MultiplierSet& mults,
                                         const ProblemFunctionals& fns) {
  mults.validate();
  check_arity(mults, fns);
  require_dim(traj.dim(), kernel.dim(), "solve_costate_backward kernel");
  require_dim(traj.dim(), law.dim(), "solve_costate_backward control");
  const TimeGrid& grid = traj.grid;
  const int steps = grid.steps;
  const double dt = grid.dt();
  const Vector& w = traj.weights;

  std::vector<ZetaPath> zetas;
  for (const MultiplierMeasure& m : mults.state) zetas.push_back(zeta_from_measure(m, grid));

  StateCostateCloud out{grid, w, traj.nodes, std::vector<Matrix>(static_cast<std::size_t>(steps + 1))};
  out.costates[static_cast<std::size_t>(steps)] = -final_gradient(mults, fns, traj.cloud(steps));

  for (int n = steps - 1; n >= 0; --n) {
    const ControlField u = law.field_in_cell(traj.step_cell[static_cast<std::size_t>(n)]);
    Vector zeta(static_cast<Eigen::Index>(zetas.size()));
    for (std::size_t l = 0; l < zetas.size(); ++l) zeta(static_cast<Eigen::Index>(l)) = zetas[l].step_value(n);

    const Matrix& lo = traj.nodes[static_cast<std::size_t>(n)];
    const Matrix& hi = traj.nodes[static_cast<std::size_t>(n + 1)];
    const Matrix mid = 0.5 * (lo + hi) + (dt / 8.0) * (traj.start_velocity[static_cast<std::size_t>(n)] -
                                                       traj.end_velocity[static_cast<std::size_t>(n)]);
    const double t1 = grid.time(n + 1);
    const StageData s_hi = stage_data(t1, hi, w, kernel, u, mults, fns, zeta);
    const StageData s_mid = stage_data(t1 - 0.5 * dt, mid, w, kernel, u, mults, fns, zeta);
    const StageData s_lo = stage_data(grid.time(n), lo, w, kernel, u, mults, fns, zeta);
    const std::array<const StageData*, 4> stage{&s_hi, &s_mid, &s_mid, &s_lo};

    Matrix r = detail::rk4_step(out.costates[static_cast<std::size_t>(n + 1)], -dt, [&](int k, const Matrix& y) {
      return costate_rhs(*stage[static_cast<std::size_t>(k)], y, w);
    });
    if (!r.allFinite()) {
      throw NumericalError("non-finite costate at step " + std::to_string(n) + " (t=" +
                               std::to_string(grid.time(n)) + ")",
                           n);
    }
    out.costates[static_cast<std::size_t>(n)] = std::move(r);
  }
  return out;
}

}  // namespace wpmp
