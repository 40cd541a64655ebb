#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace latpos {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an argument violates a documented precondition.
/// `field()` names the offending parameter so front ends can report it.
class ValidationError : public std::invalid_argument {
public:
  ValidationError(std::string field, const std::string &what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Numerical breakdown: singular Gram matrix, vanishing pair inner product,
/// invalid diffusion matrix and similar.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const char *field, const std::string &what) {
  if (!ok)
    throw ValidationError(field, what);
}

} // namespace latpos
