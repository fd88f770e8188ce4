#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace bilo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& msg, long iteration)
      : Error(msg + " (outer iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

inline void ensure_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw NumericalError(std::string(what) + " produced a non-finite value");
  }
}

}  // namespace bilo
