#pragma once

#include <stdexcept>
#include <string>

namespace lincore {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numeric routine could not produce a trustworthy result.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Evaluation would overflow a double (e.g. exponential tails).
class OverflowError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Problem size exceeds what an exact (enumerating) routine supports.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

}  // namespace lincore
