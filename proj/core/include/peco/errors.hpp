#pragma once

#include <stdexcept>
#include <string>

namespace peco {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter or configuration value violates its contract.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Tensor/state dimensions do not match what an operation expects.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A computation produced (or was handed) a non-finite value.
class NumericError : public Error {
public:
    using Error::Error;
};

/// An object was used in a state that does not permit the operation
/// (step after done, backward with a stale cache, ...).
class StateError : public Error {
public:
    using Error::Error;
};

/// Not enough data to perform the operation (short trace, underfull buffer).
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// File parsing / serialization failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace peco
