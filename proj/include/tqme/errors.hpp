#pragma once

#include <stdexcept>
#include <string>

namespace tqme {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mismatched or invalid dimensions (non-square input, unequal sizes, ...).
struct DimensionError : Error {
    using Error::Error;
};

/// Input fails a contract check (non-unitary matrix, unnormalized state, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// Scalar argument outside its admissible range.
struct RangeError : ValidationError {
    using ValidationError::ValidationError;
};

/// Malformed circuit (bad qubit index, wrong gate dimension).
struct CircuitError : ValidationError {
    using ValidationError::ValidationError;
};

/// Bundled dataset failed to load or validate.
struct DatasetError : Error {
    using Error::Error;
};

/// Empirical sample planner could not bracket a solution.
struct PlannerError : Error {
    using Error::Error;
};

/// Readout-mitigation failure (singular confusion matrix).
struct MitigationError : Error {
    using Error::Error;
};

/// Request exceeds a built-in resource guard (state size, thread count).
struct ResourceError : Error {
    using Error::Error;
};

/// Filesystem / serialization failure.
struct IoError : Error {
    using Error::Error;
};

} // namespace tqme
