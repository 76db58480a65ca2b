#include <algorithm>
#include <cmath>
#include <map>

#include "wpmp/measures.hpp"

namespace wpmp {

namespace {

void validate(const Matrix& points, const Vector& weights) {
  if (points.rows() < 1 || points.cols() < 1) {
    throw InvalidArgument("DiscreteMeasure: need at least one atom of positive dimension");
  }
  if (points.rows() != weights.size()) {
    throw DimensionError("DiscreteMeasure: " + std::to_string(points.rows()) + " points but " +
                         std::to_string(weights.size()) + " weights");
  }
  if (!points.allFinite()) {
    throw InvalidArgument("DiscreteMeasure: non-finite atom coordinates");
  }
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights(i)) || weights(i) < 0.0) {
      throw InvalidArgument("DiscreteMeasure: weight " + std::to_string(i) + " is negative or non-finite");
    }
  }
  const double mass = weights.sum();
  if (std::abs(mass - 1.0) > DiscreteMeasure::kMassTolerance) {
    throw InvalidArgument("DiscreteMeasure: total mass " + std::to_string(mass) + " differs from 1");
  }
}

struct LexLess {
  bool operator()(const Vector& a, const Vector& b) const {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  }
};

}  // namespace

DiscreteMeasure::DiscreteMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  validate(points_, weights_);
}

DiscreteMeasure DiscreteMeasure::normalized(Matrix points, Vector weights) {
  const double mass = weights.sum();
  if (!(mass > 0.0)) {
    throw InvalidArgument("DiscreteMeasure::normalized: zero total mass");
  }
  weights /= mass;
  return DiscreteMeasure(std::move(points), std::move(weights));
}

DiscreteMeasure DiscreteMeasure::dirac(const Vector& x) {
  Matrix p(1, x.size());
  p.row(0) = x.transpose();
  return DiscreteMeasure(std::move(p), Vector::Ones(1));
}

DiscreteMeasure DiscreteMeasure::uniform(Matrix points) {
  const auto n = points.rows();
  if (n < 1) {
    throw InvalidArgument("DiscreteMeasure::uniform: empty point set");
  }
  return DiscreteMeasure(std::move(points), Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Vector DiscreteMeasure::mean() const { return points_.transpose() * weights_; }

DiscreteMeasure DiscreteMeasure::with_points(Matrix points) const {
  require_dim(points_.rows(), points.rows(), "DiscreteMeasure::with_points atom count");
  require_dim(points_.cols(), points.cols(), "DiscreteMeasure::with_points");
  return DiscreteMeasure(std::move(points), weights_);
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu, const PointMap& f) {
  std::map<Vector, int, LexLess> slot;
  std::vector<Vector> images;
  std::vector<double> mass;
  for (int i = 0; i < mu.size(); ++i) {
    Vector y = f(mu.point(i));
    require_dim(mu.dim(), y.size(), "pushforward map output");
    auto [it, inserted] = slot.try_emplace(y, static_cast<int>(images.size()));
    if (inserted) {
      images.push_back(std::move(y));
      mass.push_back(mu.weight(i));
    } else {
      mass[it->second] += mu.weight(i);
    }
  }
  Matrix points(static_cast<Eigen::Index>(images.size()), mu.dim());
  Vector weights(static_cast<Eigen::Index>(images.size()));
  for (std::size_t k = 0; k < images.size(); ++k) {
    points.row(static_cast<Eigen::Index>(k)) = images[k].transpose();
    weights(static_cast<Eigen::Index>(k)) = mass[k];
  }
  return DiscreteMeasure(std::move(points), std::move(weights));
}

double support_radius(const DiscreteMeasure& mu) { return mu.points().rowwise().norm().maxCoeff(); }

Coupling::Coupling(DiscreteMeasure source, DiscreteMeasure target, Matrix joint)
    : source_(std::move(source)), target_(std::move(target)), joint_(std::move(joint)) {
  require_dim(source_.size(), joint_.rows(), "Coupling rows");
  require_dim(target_.size(), joint_.cols(), "Coupling columns");
  if ((joint_.array() < 0.0).any() || !joint_.allFinite()) {
    throw InvalidArgument("Coupling: joint masses must be finite and nonnegative");
  }
  const Vector rows = joint_.rowwise().sum();
  const Vector cols = joint_.colwise().sum().transpose();
  if ((rows - source_.weights()).cwiseAbs().maxCoeff() > kMarginalTolerance) {
    throw InvalidArgument("Coupling: first marginal does not match the source measure");
  }
  if ((cols - target_.weights()).cwiseAbs().maxCoeff() > kMarginalTolerance) {
    throw InvalidArgument("Coupling: second marginal does not match the target measure");
  }
}

DiscreteMeasure Coupling::conditional(int i) const {
  const double mass = joint_.row(i).sum();
  if (!(mass > 0.0)) {
    throw InvalidArgument("Coupling::conditional: source atom " + std::to_string(i) + " carries no mass");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < joint_.cols(); ++j) {
    if (joint_(i, j) > 0.0) keep.push_back(j);
  }
  Matrix pts(static_cast<Eigen::Index>(keep.size()), target_.dim());
  Vector w(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    pts.row(static_cast<Eigen::Index>(k)) = target_.points().row(keep[k]);
    w(static_cast<Eigen::Index>(k)) = joint_(i, keep[k]);
  }
  return DiscreteMeasure::normalized(std::move(pts), std::move(w));
}

Vector Coupling::barycenter(int i) const {
  const double mass = joint_.row(i).sum();
  if (!(mass > 0.0)) {
    throw InvalidArgument("Coupling::barycenter: source atom " + std::to_string(i) + " carries no mass");
  }
  return (target_.points().transpose() * joint_.row(i).transpose()) / mass;
}

DiscreteMeasure Coupling::as_joint_measure() const {
  const int d1 = source_.dim();
  const int d2 = target_.dim();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> support;
  for (Eigen::Index i = 0; i < joint_.rows(); ++i) {
    for (Eigen::Index j = 0; j < joint_.cols(); ++j) {
      if (joint_(i, j) > 0.0) support.emplace_back(i, j);
    }
  }
  Matrix pts(static_cast<Eigen::Index>(support.size()), d1 + d2);
  Vector w(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    const auto [i, j] = support[k];
    const auto row = static_cast<Eigen::Index>(k);
    pts.row(row).head(d1) = source_.points().row(i);
    pts.row(row).tail(d2) = target_.points().row(j);
    w(row) = joint_(i, j);
  }
  return DiscreteMeasure::normalized(std::move(pts), std::move(w));
}

double Coupling::cost(int p) const {
  double total = 0.0;
  for (Eigen::Index i = 0; i < joint_.rows(); ++i) {
    for (Eigen::Index j = 0; j < joint_.cols(); ++j) {
      if (joint_(i, j) == 0.0) continue;
      const double dist = (source_.points().row(i) - target_.points().row(j)).norm();
      total += joint_(i, j) * std::pow(dist, p);
    }
  }
  return total;
}

double w1_dual_bound(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const ScalarMap& phi) {
  require_dim(mu.dim(), nu.dim(), "w1_dual_bound");
  std::vector<Vector> pts;
  std::vector<double> vals;
  for (const DiscreteMeasure* m : {&mu, &nu}) {
    for (int i = 0; i < m->size(); ++i) {
      pts.push_back(m->point(i));
      vals.push_back(phi(pts.back()));
    }
  }
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const double gap = std::abs(vals[a] - vals[b]);
      const double dist = (pts[a] - pts[b]).norm();
      if (gap > dist * (1.0 + 1e-12) + 1e-12) {
        throw InvalidArgument("w1_dual_bound: test function is not 1-Lipschitz on the supports");
      }
    }
  }
  double total = 0.0;
  for (int i = 0; i < mu.size(); ++i) total += mu.weight(i) * vals[static_cast<std::size_t>(i)];
  for (int j = 0; j < nu.size(); ++j) total -= nu.weight(j) * vals[static_cast<std::size_t>(mu.size() + j)];
  return total;
}

DisintegrationBound disintegration_bound_check(const Coupling& gamma1, const Coupling& gamma2) {
  const DiscreteMeasure& base = gamma1.source();
  if (base.size() != gamma2.source().size() || base.dim() != gamma2.source().dim() ||
      (base.points() - gamma2.source().points()).cwiseAbs().maxCoeff() != 0.0 ||
      (base.weights() - gamma2.source().weights()).cwiseAbs().maxCoeff() > Coupling::kMarginalTolerance) {
    throw InvalidArgument("disintegration_bound_check: couplings have different first marginals");
  }
  require_dim(gamma1.target().dim(), gamma2.target().dim(), "disintegration_bound_check targets");

  DisintegrationBound out{};
  out.lhs = wasserstein(1, gamma1.as_joint_measure(), gamma2.as_joint_measure());
  out.rhs = 0.0;
  for (int i = 0; i < base.size(); ++i) {
    if (base.weight(i) == 0.0) continue;
    out.rhs += base.weight(i) * wasserstein(1, gamma1.conditional(i), gamma2.conditional(i));
  }
  return out;
}

}  // namespace wpmp
