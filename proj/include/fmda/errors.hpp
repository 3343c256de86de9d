#pragma once

#include <stdexcept>
#include <string>

namespace fmda {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or inconsistent input dimensions.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// API called in a state that does not permit the operation.
class UsageError : public Error {
public:
    using Error::Error;
};

/// File system or parse failure; the message carries the path.
class IoError : public Error {
public:
    using Error::Error;
};

/// Non-finite values detected where finite ones are required.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace fmda
