#pragma once

#include <array>

#include "wpmp/dynamics.hpp"

namespace wpmp::detail {

/// v[cloud](t, .) + u(.) at the rows of `at`.
inline Matrix total_velocity(const InteractionKernel& kernel, double t, const Matrix& cloud, const Vector& w,
                             const ControlField& u, const Matrix& at) {
  Matrix vel = kernel.velocities(t, cloud, w, at);
  for (Eigen::Index i = 0; i < at.rows(); ++i) vel.row(i) += u.value(at.row(i).transpose()).transpose();
  return vel;
}

/// D_x(v[cloud] + u) at each row of `at`.
inline std::vector<Matrix> velocity_jacobians(const InteractionKernel& kernel, double t, const Matrix& cloud,
                                              const Vector& w, const ControlField& u, const Matrix& at) {
  const int d = static_cast<int>(at.cols());
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(at.rows()));
  for (Eigen::Index i = 0; i < at.rows(); ++i) {
    const Vector x = at.row(i).transpose();
    Matrix a = u.jacobian(x);
    if (!kernel.is_zero()) {
      Matrix jv = Matrix::Zero(d, d);
      for (Eigen::Index j = 0; j < cloud.rows(); ++j) {
        if (w(j) != 0.0) jv += w(j) * kernel.jac_x(t, x, cloud.row(j).transpose());
      }
      a += jv;
    }
    out.push_back(std::move(a));
  }
  return out;
}

/// Gamma^v_{(t, at_i)}(cloud_j) = D_y H(t, at_i, cloud_j), flattened as [i * n + j].
inline std::vector<Matrix> gamma_table(const InteractionKernel& kernel, double t, const Matrix& cloud,
                                       const Matrix& at) {
  std::vector<Matrix> out;
  if (kernel.is_zero()) return out;
  out.reserve(static_cast<std::size_t>(at.rows() * cloud.rows()));
  for (Eigen::Index i = 0; i < at.rows(); ++i) {
    const Vector x = at.row(i).transpose();
    for (Eigen::Index j = 0; j < cloud.rows(); ++j) out.push_back(kernel.jac_y(t, x, cloud.row(j).transpose()));
  }
  return out;
}

/// Classical RK4 step: rhs(stage, Y) with stage in 0..3.
template <class Rhs>
Matrix rk4_step(const Matrix& y0, double h, Rhs&& rhs, std::array<Matrix, 3>* stages = nullptr) {
  const Matrix k1 = rhs(0, y0);
  const Matrix y2 = y0 + (0.5 * h) * k1;
  const Matrix k2 = rhs(1, y2);
  const Matrix y3 = y0 + (0.5 * h) * k2;
  const Matrix k3 = rhs(2, y3);
  const Matrix y4 = y0 + h * k3;
  const Matrix k4 = rhs(3, y4);
  if (stages != nullptr) *stages = {y2, y3, y4};
  return y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Stage times and clouds of forward step n.
struct StepStages {
  std::array<double, 4> times;
  std::array<const Matrix*, 4> clouds;
};

inline StepStages forward_stages(const TrajectorySolution& traj, int n) {
  const double t = traj.grid.time(n);
  const double dt = traj.grid.dt();
  const auto& st = traj.stages[static_cast<std::size_t>(n)];
  return {{t, t + 0.5 * dt, t + 0.5 * dt, t + dt},
          {&traj.nodes[static_cast<std::size_t>(n)], &st[0], &st[1], &st[2]}};
}

}  // namespace wpmp::detail
