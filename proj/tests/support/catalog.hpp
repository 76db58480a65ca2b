#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wpmp/functionals.hpp"

namespace catalog {

using wpmp::DiscreteMeasure;
using wpmp::Matrix;

/// A scalar functional on measures together with its claimed Wasserstein gradient.
struct Case {
  std::string name;
  std::function<double(const DiscreteMeasure&)> value;
  std::function<Matrix(const DiscreteMeasure&)> grad;
};

/// Every shipped terminal, running and state-constraint functional in dimension d.
std::vector<Case> shipped_functionals(int d);

/// One state constraint per constraint integrand, with nontrivial moments.
std::vector<wpmp::StateConstraint> constraint_families(int d);

/// Basis mixing constant, tanh and identity fields.
wpmp::BasisPtr mixed_basis(int d);

}  // namespace catalog
