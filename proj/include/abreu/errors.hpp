#pragma once

#include <stdexcept>
#include <string>

namespace abreu {

/// Argument outside the mathematical domain of an operation (d <= 0, det <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Argument outside the sampled or representable range (tabulated G, w range).
class RangeError : public std::out_of_range {
 public:
  RangeError(const std::string& what, double lo, double hi)
      : std::out_of_range(what), lower(lo), upper(hi) {}
  double lower;
  double upper;
};

/// The domain cannot be resolved by the requested grid spacing.
class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stencil or quadrature needs more room than the grid provides.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coefficient matrix of the linearized operator is not positive definite.
class EllipticityError : public std::runtime_error {
 public:
  EllipticityError(const std::string& what, int node, double eig)
      : std::runtime_error(what), worst_node(node), min_eigenvalue(eig) {}
  int worst_node;
  double min_eigenvalue;
};

/// Malformed experiment configuration or expression.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace abreu
