#pragma once

#include <stdexcept>
#include <string>

namespace ssvm {

/// Base class for all errors raised by the toolkit.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Vector dimensions do not agree.
struct ShapeError : Error {
    using Error::Error;
};

/// Input value outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

/// Bad parameter value (non-positive gamma, empty grid, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// Malformed input file.
struct ParseError : Error {
    using Error::Error;
};

/// Referenced sample/index is not stored.
struct NotFoundError : Error {
    using Error::Error;
};

/// Internal state violates a maintained invariant (state corrupt).
struct InvariantError : Error {
    using Error::Error;
};

/// An iterative procedure exceeded its iteration guard.
struct ConvergenceError : Error {
    using Error::Error;
};

/// Filesystem-level failure.
struct IoError : Error {
    using Error::Error;
};

/// Checkpoint payload failed its integrity checksum.
struct CorruptionError : Error {
    using Error::Error;
};

/// Checkpoint carries an unsupported format version.
struct VersionError : Error {
    using Error::Error;
};

}  // namespace ssvm
