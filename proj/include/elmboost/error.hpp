#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace elmboost {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid argument value (fraction out of range, zero vector, bad hyperparameter).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Cholesky factorization hit a non-positive pivot.
class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(std::size_t pivot)
        : Error("matrix is not positive definite (pivot " + std::to_string(pivot) + ")"),
          pivot_(pivot) {}

    NotPositiveDefinite(std::size_t pivot, std::size_t level, std::size_t step)
        : Error("matrix is not positive definite (pivot " + std::to_string(pivot) +
                ") at level " + std::to_string(level) + ", step " + std::to_string(step)),
          pivot_(pivot), level_(level), step_(step) {}

    std::size_t pivot() const noexcept { return pivot_; }
    std::optional<std::size_t> level() const noexcept { return level_; }
    std::optional<std::size_t> step() const noexcept { return step_; }

private:
    std::size_t pivot_;
    std::optional<std::size_t> level_;
    std::optional<std::size_t> step_;
};

/// Failure reading or writing a file on disk.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace elmboost
