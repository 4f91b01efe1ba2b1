#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tarur {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (bad rows, gaps, duplicates).
class DataError : public Error {
public:
    DataError(const std::string& what, std::size_t row = 0) : Error(what), row_(row) {}

    /// 1-based data row (header excluded) that triggered the error, 0 if not row-specific.
    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// Inputs too short or shapes that do not line up.
class SizingError : public Error {
public:
    using Error::Error;
};

/// Rank-deficient design or non-invertible restricted covariance.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, std::size_t column) : Error(what), column_(column) {}

    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

/// A threshold regime holds too few observations to identify its coefficients.
class IdentifiabilityError : public Error {
public:
    IdentifiabilityError(const std::string& what, int regime, std::size_t count)
        : Error(what), regime_(regime), count_(count) {}

    [[nodiscard]] int regime() const noexcept { return regime_; }
    [[nodiscard]] std::size_t count() const noexcept { return count_; }

private:
    int regime_;
    std::size_t count_;
};

/// No admissible threshold candidate, or a bootstrap that exhausted its redraw budget.
class EstimationError : public Error {
public:
    using Error::Error;
};

/// Zero (long-run) variance where a positive one is required.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Null-model recursion that is explosive or produced non-finite values.
class SimulationError : public Error {
public:
    using Error::Error;
};

/// Output files or directories that cannot be written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace tarur
