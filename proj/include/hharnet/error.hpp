#pragma once

#include <stdexcept>
#include <string>

namespace hharnet {

/// Base class for all errors raised by the library. The CLI catches these and
/// prints a single "error: ..." line.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad configuration value (fractions out of range, invalid label tree, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input file does not have the expected columns or container layout.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A cell or line could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Vector/matrix shape mismatch.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Training failed (divergence, empty node dataset, ...).
class TrainingError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace hharnet
