#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mhmgt {

/// Cholesky broke down: the pivot at `pivot()` was not safely positive.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(std::size_t pivot, double value)
      : std::runtime_error("matrix is not positive definite (pivot " +
                           std::to_string(pivot) + " = " +
                           std::to_string(value) + ")"),
        pivot_(pivot),
        value_(value) {}

  std::size_t pivot() const noexcept { return pivot_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t pivot_;
  double value_;
};

/// The target is not verifiably log-concave at the evaluated point.
class HessianNotNegativeDefinite : public std::runtime_error {
 public:
  explicit HessianNotNegativeDefinite(const NotPositiveDefinite& cause)
      : std::runtime_error("Hessian is not negative definite: " +
                           std::string(cause.what())),
        pivot_(cause.pivot()) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ModeNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SliceFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteDraw : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_dim(std::ptrdiff_t got, std::ptrdiff_t want,
                        const char* what) {
  if (got != want) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " +
                            std::to_string(want) + ", got " +
                            std::to_string(got));
  }
}

}  // namespace mhmgt
