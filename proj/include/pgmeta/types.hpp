#ifndef PGMETA_TYPES_HPP
#define PGMETA_TYPES_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pgmeta {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// One row per center, columns (treatment, control).
template <typename Scalar>
using ArmMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

using ArmMatrixd = ArmMatrix<double>;
using Vector2d = Eigen::Vector2d;
using Matrix2d = Eigen::Matrix2d;

// Error taxonomy. The CLI maps InvalidParameter (and subclasses) to exit
// code 2 and NumericalError to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class DomainError : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

class ElicitationError : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

class ParseError : public InvalidParameter {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InvalidParameter(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pgmeta

#endif  // PGMETA_TYPES_HPP
