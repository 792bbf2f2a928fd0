#pragma once

#include <stdexcept>
#include <string>

namespace threadforge {

// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed, missing or inconsistent input data (files, records, labels).
class DataError : public Error {
public:
    using Error::Error;
};

// Incompatible tensor shapes or graph dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

// NaN/Inf produced or consumed by a numerical routine.
class NumericError : public Error {
public:
    using Error::Error;
};

// Caller broke a precondition (bad argument, misuse of an object).
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace threadforge
