#pragma once

#include <iosfwd>

#include "wpmp/types.hpp"

namespace wpmp {

/// Weighted particle cloud representing a compactly supported probability
/// measure on R^d. Rows of `points()` are atoms.
class DiscreteMeasure {
 public:
  static constexpr double kMassTolerance = 1e-12;

  /// Validates nonnegative weights summing to one (within kMassTolerance)
  /// and finite coordinates.
  DiscreteMeasure(Matrix points, Vector weights);

  /// Rescales the weights to unit mass. The only entry point that touches
  /// normalization; callers use it explicitly after weight arithmetic.
  static DiscreteMeasure normalized(Matrix points, Vector weights);
  static DiscreteMeasure dirac(const Vector& x);
  static DiscreteMeasure uniform(Matrix points);

  int dim() const { return static_cast<int>(points_.cols()); }
  int size() const { return static_cast<int>(points_.rows()); }
  const Matrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  Vector point(int i) const { return points_.row(i).transpose(); }
  double weight(int i) const { return weights_(i); }
  Vector mean() const;

  /// Same weights, new atom positions (atom identity preserved).
  DiscreteMeasure with_points(Matrix points) const;

 private:
  Matrix points_;
  Vector weights_;
};

/// f#mu. Atoms landing on exactly equal coordinates are merged.
DiscreteMeasure pushforward(const DiscreteMeasure& mu, const PointMap& f);

double support_radius(const DiscreteMeasure& mu);

/// Transport plan between two discrete measures.
class Coupling {
 public:
  static constexpr double kMarginalTolerance = 1e-10;

  Coupling(DiscreteMeasure source, DiscreteMeasure target, Matrix joint);

  const DiscreteMeasure& source() const { return source_; }
  const DiscreteMeasure& target() const { return target_; }
  const Matrix& joint() const { return joint_; }

  /// Disintegration gamma_{x_i}: normalized row i over the target atoms.
  DiscreteMeasure conditional(int i) const;
  /// Conditional mean of the target given source atom i.
  Vector barycenter(int i) const;
  /// The plan as a probability measure on R^{2d}, atoms (x_i, y_j).
  DiscreteMeasure as_joint_measure() const;
  double cost(int p) const;

 private:
  DiscreteMeasure source_;
  DiscreteMeasure target_;
  Matrix joint_;
};

struct OptimalTransport {
  double distance;
  Coupling plan;
};

/// Exact W_p (p in {1, 2}) by linear programming over couplings.
OptimalTransport optimal_transport(int p, const DiscreteMeasure& mu, const DiscreteMeasure& nu);
double wasserstein(int p, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Integral of phi against (mu - nu). Throws InvalidArgument when phi fails the
/// pairwise 1-Lipschitz check on the union of supports.
double w1_dual_bound(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const ScalarMap& phi);

struct DisintegrationBound {
  double lhs;  // W1(gamma1, gamma2) on R^{2d}
  double rhs;  // sum_i mu_i W1(gamma1_{x_i}, gamma2_{x_i})
};

DisintegrationBound disintegration_bound_check(const Coupling& gamma1, const Coupling& gamma2);

namespace transport {

/// Min-cost transportation between supplies `a` and demands `b`.
/// Returns the optimal flow matrix (rows = supplies).
Matrix solve_min_cost_flow(const Vector& a, const Vector& b, const Matrix& cost);

/// Square assignment (Hungarian). Returns column assigned to each row.
std::vector<int> solve_assignment(const Matrix& cost);

}  // namespace transport

/// CSV with a `# dim=d` header and one `w, x1..xd` row per atom.
void write_measure_csv(std::ostream& out, const DiscreteMeasure& mu);
DiscreteMeasure read_measure_csv(std::istream& in);
DiscreteMeasure read_measure_csv_file(const std::string& path);

}  // namespace wpmp
