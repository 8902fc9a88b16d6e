#ifndef MORPHFORGE_ERRORS_HPP
#define MORPHFORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace morphforge {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file (JSON syntax, unexpected schema, bad PNG, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

/// An input violates a documented invariant or precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A requested evaluation protocol cannot be formed or was violated
/// (too few identities, probe reused as morph source, missing threshold).
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Geometry failure: degenerate alignment, collinear triangulation input,
/// singular affine system.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Sampling or image-shape failure (out-of-bounds sample, size mismatch).
class ImageError : public Error {
public:
    using Error::Error;
};

/// A model backend misbehaved (dimension mismatch, subprocess failure).
class BackendError : public Error {
public:
    using Error::Error;
};

/// Optimizer aborted (non-finite loss or gradient).
class OptimizationError : public Error {
public:
    using Error::Error;
};

/// Classifier training failed (singular system despite regularization).
class TrainingError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure (unreadable/unwritable path).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace morphforge

#endif
