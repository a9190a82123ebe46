#pragma once

#include <stdexcept>
#include <string>

namespace gaitstrip {

// Base for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mismatched or invalid extents, ranks and axes.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Out-of-domain scalar parameters (p < 1, negative margin, bad labels ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Malformed model weights or configuration (wrong kind, wrong kernel layout).
class ModelError : public Error {
public:
    using Error::Error;
};

// File-format failures. Each subclass is a distinct, catchable condition.
class FormatError : public Error {
public:
    using Error::Error;
};

class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncatedError : public FormatError {
public:
    using FormatError::FormatError;
};

class FingerprintMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

} // namespace gaitstrip
