#pragma once

#include <stdexcept>
#include <string>

namespace hlgp {

// Raised for malformed files: bad JSON, missing or mistyped fields.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Raised for semantically invalid data: bad sizes, bad ranges, broken preconditions.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised for filesystem failures: unreadable or unwritable paths.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an internal invariant breaks; indicates a bug, not bad input.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace hlgp
