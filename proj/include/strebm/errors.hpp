#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace strebm {

// Bad shapes, out-of-range hyperparameters, malformed files.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A non-positive pivot showed up during Cholesky factorization.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(std::size_t pivot, double value)
      : std::runtime_error("matrix is not positive definite (pivot " + std::to_string(pivot) +
                           " = " + std::to_string(value) + ")"),
        pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class NumericalInstability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Correlation against a constant vector is undefined.
class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedSize : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Raised by the trainer when the loss or a gradient stops being finite.
// `epoch` is the 1-based index of the step that failed.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t epoch, const std::string& what)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace strebm
