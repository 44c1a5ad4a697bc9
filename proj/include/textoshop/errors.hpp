#pragma once

#include <stdexcept>
#include <string>

namespace textoshop {

/// Root of every exception thrown by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Request is malformed or out of bounds (HTTP 422, CLI exit 3).
class ValidationError : public Error {
public:
    using Error::Error;
};

class InvalidRequestError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NoSplitPointError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnreachableTargetError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Layer model.
class OverlapError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class HiddenLayerError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// The edited span touches text that only exists above the active layer.
class AnchorError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnknownLayerError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

// Changesets.
class LengthMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ContentMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Language backend (HTTP 502, CLI exit 4).
class BackendError : public Error {
public:
    using Error::Error;
};

class TimeoutError : public BackendError {
public:
    using BackendError::BackendError;
};

class RemoteError : public BackendError {
public:
    RemoteError(int status, std::string body_excerpt)
        : BackendError("remote backend returned HTTP " + std::to_string(status) + ": " + body_excerpt),
          status_(status),
          body_(std::move(body_excerpt))
    {
    }

    int status() const noexcept { return status_; }
    const std::string& body_excerpt() const noexcept { return body_; }

private:
    int status_;
    std::string body_;
};

/// Blank or unusable completion from the backend.
class CompletionError : public BackendError {
public:
    using BackendError::BackendError;
};

// Service-level.
class NotFoundError : public Error {
public:
    using Error::Error;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

}  // namespace textoshop
