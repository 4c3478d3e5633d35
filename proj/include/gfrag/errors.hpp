#pragma once

#include <stdexcept>
#include <string>

namespace gfrag {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that is structurally wrong (bad grid, bad config value).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Coefficients that violate a standing assumption (e.g. r <= 0).
class InvalidModel : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// Configuration document could not be parsed or is missing keys.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// Failures of a numerical procedure. The CLI maps these to exit code 2.
class NumericError : public Error {
public:
    using Error::Error;
};

class OutOfRange : public NumericError {
public:
    using NumericError::NumericError;
};

class Diverges : public NumericError {
public:
    using NumericError::NumericError;
};

class LambdaTooSmall : public NumericError {
public:
    using NumericError::NumericError;
};

class ConvergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

class DegenerateModel : public NumericError {
public:
    using NumericError::NumericError;
};

class StepSizeError : public NumericError {
public:
    using NumericError::NumericError;
};

class MissingTail : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// An internal invariant was observed to fail at runtime.
class ConsistencyError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace gfrag
