#pragma once

#include <stdexcept>
#include <string>

namespace lidscope {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad magic, version or truncated payload in a LIDE file.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Non-finite or otherwise invalid numeric content.
class DataError : public Error {
public:
    using Error::Error;
};

/// Metadata sidecar that does not match its point cloud.
class MetadataError : public Error {
public:
    using Error::Error;
};

/// Precondition violated by a caller-supplied argument.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// The input is valid but carries no usable geometric signal
/// (all ratios equal to one, zero pooled variance, ...).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Two paired estimate vectors do not line up.
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Malformed user input file (estimate CSV, metrics CSV, checkpoint list).
class InputError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace lidscope
