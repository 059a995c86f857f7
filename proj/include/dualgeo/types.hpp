#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace dualgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Coordinates of a point in the single chart of a fixture.
using Point = Eigen::VectorXd;

/// Base for all recoverable numerical failures raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The metric (or a matrix that must be inverted) is singular at a point.
class SingularMetricError : public Error {
 public:
  using Error::Error;
};

/// A finite-difference stencil or a trajectory left the chart domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

std::string format_point(const Point& p);

}  // namespace dualgeo
