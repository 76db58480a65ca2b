#include <cmath>
#include <type_traits>

#include "wpmp/functionals.hpp"

namespace wpmp {

namespace {

void check_tuple_cap(const NBody& nb, const DiscreteMeasure& mu) {
  const double work = nb.potential.arity * std::pow(static_cast<double>(mu.size()), nb.potential.arity);
  if (work > NBody::kTupleCap) {
    throw InvalidArgument("n-body functional '" + nb.potential.id + "': n*N^n = " + std::to_string(work) +
                          " exceeds the enumeration cap of 1e6");
  }
}

// Calls visit(indices) for every index tuple in [0, N)^n.
template <class Visit>
void for_each_tuple(int n, int count, Visit&& visit) {
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (;;) {
    visit(idx);
    int k = n - 1;
    while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == count) {
      idx[static_cast<std::size_t>(k)] = 0;
      --k;
    }
    if (k < 0) return;
  }
}

double nbody_value(const NBody& nb, const DiscreteMeasure& mu) {
  check_tuple_cap(nb, mu);
  const int n = nb.potential.arity;
  std::vector<Vector> slots(static_cast<std::size_t>(n));
  double total = 0.0;
  for_each_tuple(n, mu.size(), [&](const std::vector<int>& idx) {
    double w = 1.0;
    for (int s = 0; s < n; ++s) {
      w *= mu.weight(idx[static_cast<std::size_t>(s)]);
      slots[static_cast<std::size_t>(s)] = mu.point(idx[static_cast<std::size_t>(s)]);
    }
    if (w != 0.0) total += w * nb.potential.value(slots);
  });
  return total;
}

// Slot-pinned form: grad(x_i) = sum_s sum_{tuples with slot s = i} prod_{r != s} w_r grad_s W.
Matrix nbody_gradient(const NBody& nb, const DiscreteMeasure& mu) {
  check_tuple_cap(nb, mu);
  const int n = nb.potential.arity;
  std::vector<Vector> slots(static_cast<std::size_t>(n));
  Matrix grad = Matrix::Zero(mu.size(), mu.dim());
  for_each_tuple(n, mu.size(), [&](const std::vector<int>& idx) {
    for (int s = 0; s < n; ++s) slots[static_cast<std::size_t>(s)] = mu.point(idx[static_cast<std::size_t>(s)]);
    for (int s = 0; s < n; ++s) {
      double w = 1.0;
      for (int r = 0; r < n; ++r) {
        if (r != s) w *= mu.weight(idx[static_cast<std::size_t>(r)]);
      }
      if (w == 0.0) continue;
      grad.row(idx[static_cast<std::size_t>(s)]) += w * nb.potential.gradient(slots, s).transpose();
    }
  });
  return grad;
}

int nearest_target(const Matrix& targets, const Vector& x, Diagnostics* diag) {
  int best = 0;
  double best_d = (targets.row(0).transpose() - x).squaredNorm();
  bool tie = false;
  for (Eigen::Index k = 1; k < targets.rows(); ++k) {
    const double d = (targets.row(k).transpose() - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
      tie = false;
    } else if (d == best_d) {
      tie = true;
    }
  }
  if (tie && diag != nullptr) {
    diag->warn("support distance: nearest target of a point is not unique; using index " + std::to_string(best));
  }
  return best;
}

}  // namespace

TerminalFunctional::TerminalFunctional(std::string name, Family family, double offset)
    : name_(std::move(name)), family_(std::move(family)), offset_(offset) {
  if (const auto* sd = std::get_if<SupportDistance>(&family_); sd != nullptr && sd->targets.rows() < 1) {
    throw InvalidArgument("support distance functional needs at least one target point");
  }
  if (const auto* nb = std::get_if<NBody>(&family_); nb != nullptr) {
    if (nb->potential.arity < 1 || !nb->potential.value || !nb->potential.gradient) {
      throw InvalidArgument("n-body functional needs a potential with value and gradient");
    }
  }
}

double TerminalFunctional::value(const DiscreteMeasure& mu) const {
  const double base = std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, NBody>) {
          require_dim(f.potential.dim, mu.dim(), "n-body functional");
          return nbody_value(f, mu);
        } else if constexpr (std::is_same_v<T, Variance>) {
          const Vector m = mu.mean();
          return 0.5 * ((mu.points().rowwise() - m.transpose()).rowwise().squaredNorm().dot(mu.weights()));
        } else {
          require_dim(f.targets.cols(), mu.dim(), "support distance functional");
          double total = 0.0;
          for (int i = 0; i < mu.size(); ++i) {
            const Vector x = mu.point(i);
            const int k = nearest_target(f.targets, x, nullptr);
            total += 0.5 * mu.weight(i) * (f.targets.row(k).transpose() - x).squaredNorm();
          }
          return total;
        }
      },
      family_);
  return base + offset_;
}

Matrix TerminalFunctional::gradient(const DiscreteMeasure& mu, Diagnostics* diag) const {
  return std::visit(
      [&](const auto& f) -> Matrix {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, NBody>) {
          require_dim(f.potential.dim, mu.dim(), "n-body functional");
          return nbody_gradient(f, mu);
        } else if constexpr (std::is_same_v<T, Variance>) {
          return mu.points().rowwise() - mu.mean().transpose();
        } else {
          require_dim(f.targets.cols(), mu.dim(), "support distance functional");
          Matrix g(mu.size(), mu.dim());
          for (int i = 0; i < mu.size(); ++i) {
            const Vector x = mu.point(i);
            g.row(i) = (x - f.targets.row(nearest_target(f.targets, x, diag)).transpose()).transpose();
          }
          return g;
        }
      },
      family_);
}

double eval_terminal(const TerminalFunctional& phi, const DiscreteMeasure& mu) { return phi.value(mu); }

Matrix grad_terminal(const TerminalFunctional& phi, const DiscreteMeasure& mu, Diagnostics* diag) {
  return phi.gradient(mu, diag);
}

}  // namespace wpmp
