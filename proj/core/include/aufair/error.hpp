#pragma once

#include <stdexcept>
#include <string>

namespace aufair {

// Base of every error raised by the library. The CLI maps the two families
// below onto exit codes (configuration -> 2, data -> 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigurationError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class SchemaError : public DataError {
public:
    using DataError::DataError;
};

class ValidationError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class ArgumentError : public ConfigurationError {
public:
    using ConfigurationError::ConfigurationError;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class DegenerateModelError : public DataError {
public:
    using DataError::DataError;
};

// A fitness or bias value requested on a label set that cannot define it.
class UndefinedMetricError : public DataError {
public:
    using DataError::DataError;
};

class StateError : public Error {
public:
    using Error::Error;
};

} // namespace aufair
