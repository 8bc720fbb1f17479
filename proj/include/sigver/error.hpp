#ifndef SIGVER_ERROR_HPP
#define SIGVER_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sigver {

// Base for all library errors. CLI maps subclasses to exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration value or file (exit code 1).
struct ConfigError : Error {
    using Error::Error;
};

// Tensor/layer/feature dimension mismatch.
struct ShapeError : Error {
    using Error::Error;
};

// Blank or constant image: no usable signature content.
struct DegenerateImageError : Error {
    using Error::Error;
};

// Dataset protocol violation (not enough signatures, bad split, ...).
struct ProtocolError : Error {
    using Error::Error;
};

// Optimizer / solver failure (exit code 2).
struct TrainingError : Error {
    using Error::Error;
};

// File i/o and artifact format problems.
struct IoError : Error {
    using Error::Error;
};

// Requested metric cannot be computed from the available score lists.
struct ReportError : Error {
    using Error::Error;
};

} // namespace sigver

#endif
