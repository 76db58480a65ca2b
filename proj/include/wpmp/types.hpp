#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpmp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Point map R^d -> R^d used for pushforwards and perturbations.
using PointMap = std::function<Vector(const Vector&)>;
using ScalarMap = std::function<double(const Vector&)>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-finite values produced while integrating; `step` is the offending
/// grid step (or -1 when not tied to a step).
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Collects non-fatal warnings (ties, out-of-bound queries) for callers that care.
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

/// Named numeric parameters for catalog entries. Scalars are length-1 lists.
class Params {
 public:
  Params() = default;
  Params& set(const std::string& name, double value) {
    values_[name] = {value};
    return *this;
  }
  Params& set(const std::string& name, std::vector<double> value) {
    values_[name] = std::move(value);
    return *this;
  }
  bool has(const std::string& name) const { return values_.count(name) > 0; }
  double scalar(const std::string& name, double fallback) const;
  /// Vector of length `dim`; a stored scalar is broadcast.
  Vector vector(const std::string& name, int dim, const Vector& fallback) const;
  const std::map<std::string, std::vector<double>>& values() const { return values_; }

 private:
  std::map<std::string, std::vector<double>> values_;
};

inline void require_dim(long expected, long actual, const char* what) {
  if (expected != actual) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
  }
}

inline double Params::scalar(const std::string& name, double fallback) const {
  const auto it = values_.find(name);
  if (it == values_.end()) return fallback;
  if (it->second.size() != 1) {
    throw InvalidArgument("parameter '" + name + "' must be a scalar");
  }
  return it->second.front();
}

inline Vector Params::vector(const std::string& name, int dim, const Vector& fallback) const {
  const auto it = values_.find(name);
  if (it == values_.end()) return fallback;
  if (it->second.size() == 1) return Vector::Constant(dim, it->second.front());
  require_dim(dim, static_cast<long>(it->second.size()), ("parameter '" + name + "'").c_str());
  return Eigen::Map<const Vector>(it->second.data(), dim);
}

}  // namespace wpmp
