#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace factsum {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file. `line` is 1-based, 0 when the whole file is at fault.
struct ParseError : Error {
    ParseError(const std::string& where, std::size_t line, const std::string& what)
        : Error(where + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
          line(line) {}
    std::size_t line;
};

// Input parsed but violates a structural invariant (duplicate token, unknown merge symbol).
struct IntegrityError : Error {
    using Error::Error;
};

struct LookupError : Error {
    using Error::Error;
};

// Record-level data problem (empty source, duplicate id, id mismatch).
struct DataError : Error {
    using Error::Error;
};

struct UsageError : Error {
    using Error::Error;
};

struct NoKeywordsError : Error {
    using Error::Error;
};

// Anything that went wrong talking to, or trusting, a scorer backend.
struct ScorerError : Error {
    using Error::Error;
};

struct TransportError : ScorerError {
    using ScorerError::ScorerError;
};

struct BackendError : ScorerError {
    BackendError(int status, const std::string& what) : ScorerError(what), status(status) {}
    int status;
};

struct ProtocolError : ScorerError {
    using ScorerError::ScorerError;
};

} // namespace factsum
