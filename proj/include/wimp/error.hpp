#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wimp {

// Root of every error thrown by the library. `kind()` is a stable
// machine-greppable tag used by the CLI's one-line diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("parse", "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Score outside [0, 1] or off the 0.05 grid.
class ValidationError : public Error {
public:
    ValidationError(std::size_t line, const std::string& what)
        : Error("validation", "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Token text / token count disagreement between two aligned sources.
class AlignmentError : public Error {
public:
    explicit AlignmentError(const std::string& what) : Error("alignment", what) {}
};

// An annotation row names an utterance the transcript does not contain.
class ReferenceError : public Error {
public:
    explicit ReferenceError(const std::string& what) : Error("reference", what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

class DegenerateVarianceError : public Error {
public:
    explicit DegenerateVarianceError(const std::string& what) : Error("degenerate-variance", what) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error("numeric", what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

// Checkpoint loading failures. Each failure mode has its own type.
class CheckpointError : public Error {
public:
    CheckpointError(std::string kind, const std::string& what) : Error(std::move(kind), what) {}
};

class VersionError : public CheckpointError {
public:
    explicit VersionError(const std::string& what) : CheckpointError("checkpoint-version", what) {}
};

class TruncationError : public CheckpointError {
public:
    explicit TruncationError(const std::string& what) : CheckpointError("checkpoint-truncated", what) {}
};

class ChecksumError : public CheckpointError {
public:
    explicit ChecksumError(const std::string& what) : CheckpointError("checkpoint-checksum", what) {}
};

} // namespace wimp
