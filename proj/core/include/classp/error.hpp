#pragma once

#include <stdexcept>
#include <string>

namespace classp {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape or length mismatch between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Invalid argument value (negative std, label out of range, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Non-finite value encountered where a finite one is required.
class NumericError : public Error {
public:
    using Error::Error;
};

// Malformed file contents (IDX headers, results files, ...).
class FormatError : public Error {
public:
    using Error::Error;
};

// Invalid experiment configuration; message names the offending key.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Referenced dataset file is missing or unreadable.
class DataError : public Error {
public:
    using Error::Error;
};

} // namespace classp
