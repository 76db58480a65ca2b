#include <algorithm>
#include <cmath>
#include <limits>

#include "wpmp/measures.hpp"

namespace wpmp {

namespace transport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassEps = 1e-14;

}  // namespace

// Successive shortest paths on the bipartite transportation network with
// Johnson potentials. Dense Dijkstra, O((n+m)^2) per augmentation.
Matrix solve_min_cost_flow(const Vector& a, const Vector& b, const Matrix& cost) {
  const Eigen::Index n = a.size();
  const Eigen::Index m = b.size();
  require_dim(n, cost.rows(), "solve_min_cost_flow cost rows");
  require_dim(m, cost.cols(), "solve_min_cost_flow cost columns");
  if (std::abs(a.sum() - b.sum()) > 1e-10) {
    throw InvalidArgument("solve_min_cost_flow: infeasible problem, supply " + std::to_string(a.sum()) +
                          " != demand " + std::to_string(b.sum()));
  }

  Matrix flow = Matrix::Zero(n, m);
  Vector supply = a;
  Vector demand = b;

  // pot(i) for supplies, pot(n + j) for demands; reduced cost c_ij + pot_i - pot_j >= 0.
  Vector pot = Vector::Zero(n + m);
  for (Eigen::Index j = 0; j < m; ++j) pot(n + j) = cost.col(j).minCoeff();

  Vector dist(n + m);
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n + m));
  std::vector<char> done(static_cast<std::size_t>(n + m));

  const Eigen::Index max_iter = 4 * (n + m) * (n + m) + 16;
  for (Eigen::Index iter = 0;; ++iter) {
    if (demand.maxCoeff() <= kMassEps || supply.maxCoeff() <= kMassEps) break;
    if (iter > max_iter) {
      throw NumericalError("solve_min_cost_flow: augmentation limit exceeded", -1);
    }

    dist.setConstant(kInf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (supply(i) > kMassEps) dist(i) = 0.0;
    }

    for (;;) {
      Eigen::Index u = -1;
      double best = kInf;
      for (Eigen::Index k = 0; k < n + m; ++k) {
        if (!done[static_cast<std::size_t>(k)] && dist(k) < best) {
          best = dist(k);
          u = k;
        }
      }
      if (u < 0) break;
      done[static_cast<std::size_t>(u)] = 1;
      if (u < n) {
        for (Eigen::Index j = 0; j < m; ++j) {
          const double rc = std::max(0.0, cost(u, j) + pot(u) - pot(n + j));
          if (best + rc < dist(n + j)) {
            dist(n + j) = best + rc;
            parent[static_cast<std::size_t>(n + j)] = u;
          }
        }
      } else {
        const Eigen::Index j = u - n;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (flow(i, j) <= kMassEps) continue;
          const double rc = std::max(0.0, -cost(i, j) + pot(u) - pot(i));
          if (best + rc < dist(i)) {
            dist(i) = best + rc;
            parent[static_cast<std::size_t>(i)] = u;
          }
        }
      }
    }

    Eigen::Index sink = -1;
    double sink_dist = kInf;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (demand(j) > kMassEps && dist(n + j) < sink_dist) {
        sink_dist = dist(n + j);
        sink = n + j;
      }
    }
    if (sink < 0) {
      throw InvalidArgument("solve_min_cost_flow: infeasible problem, unmet demand");
    }

    const double reach = sink_dist;
    for (Eigen::Index k = 0; k < n + m; ++k) pot(k) += std::min(dist(k), reach);

    double push = demand(sink - n);
    Eigen::Index v = sink;
    while (parent[static_cast<std::size_t>(v)] >= 0) {
      const Eigen::Index p = parent[static_cast<std::size_t>(v)];
      if (p >= n) push = std::min(push, flow(v, p - n));
      v = p;
    }
    push = std::min(push, supply(v));

    supply(v) -= push;
    demand(sink - n) -= push;
    v = sink;
    while (parent[static_cast<std::size_t>(v)] >= 0) {
      const Eigen::Index p = parent[static_cast<std::size_t>(v)];
      if (p < n) {
        flow(p, v - n) += push;
      } else {
        flow(v, p - n) -= push;
        if (flow(v, p - n) < kMassEps) flow(v, p - n) = 0.0;
      }
      v = p;
    }
  }
  return flow;
}

std::vector<int> solve_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  require_dim(n, cost.cols(), "solve_assignment (square cost)");
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<int> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), kInf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return assignment;
}

}  // namespace transport

namespace {

Matrix ground_cost(int p, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  Matrix c(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i) {
    for (int j = 0; j < nu.size(); ++j) {
      const double d = (mu.points().row(i) - nu.points().row(j)).norm();
      c(i, j) = p == 1 ? d : d * d;
    }
  }
  return c;
}

bool uniform_equal_count(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.size() != nu.size()) return false;
  const double w = 1.0 / static_cast<double>(mu.size());
  return (mu.weights().array() == w).all() && (nu.weights().array() == w).all();
}

// Total order on measures so that W(mu, nu) and W(nu, mu) run the same solve.
bool canonical_before(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  const auto lex = [](const auto& x, const auto& y) {
    return std::lexicographical_compare(x.data(), x.data() + x.size(), y.data(), y.data() + y.size());
  };
  if (lex(a.weights(), b.weights())) return true;
  if (lex(b.weights(), a.weights())) return false;
  return lex(a.points(), b.points());
}

}  // namespace

OptimalTransport optimal_transport(int p, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (p != 1 && p != 2) {
    throw InvalidArgument("wasserstein: p must be 1 or 2, got " + std::to_string(p));
  }
  require_dim(mu.dim(), nu.dim(), "wasserstein");
  if (canonical_before(nu, mu)) {
    OptimalTransport swapped = optimal_transport(p, nu, mu);
    return OptimalTransport{swapped.distance, Coupling(mu, nu, swapped.plan.joint().transpose())};
  }
  const Matrix cost = ground_cost(p, mu, nu);

  Matrix joint;
  if (uniform_equal_count(mu, nu)) {
    const auto assign = transport::solve_assignment(cost);
    joint = Matrix::Zero(mu.size(), nu.size());
    for (int i = 0; i < mu.size(); ++i) joint(i, assign[static_cast<std::size_t>(i)]) = mu.weight(i);
  } else {
    joint = transport::solve_min_cost_flow(mu.weights(), nu.weights(), cost);
  }

  const double total = (joint.array() * cost.array()).sum();
  const double distance = p == 1 ? std::max(0.0, total) : std::sqrt(std::max(0.0, total));
  return OptimalTransport{distance, Coupling(mu, nu, std::move(joint))};
}

double wasserstein(int p, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return optimal_transport(p, mu, nu).distance;
}

}  // namespace wpmp
