#pragma once

#include <stdexcept>
#include <string>

namespace redy {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value or violated configuration invariant.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed model manifest, tensor container, or inconsistent layer dims.
class ModelError : public Error {
public:
    using Error::Error;
};

} // namespace redy
