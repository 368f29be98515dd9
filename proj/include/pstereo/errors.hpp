#pragma once

#include <stdexcept>
#include <string>

namespace pstereo {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or size mismatch between grids; never silently broadcast.
struct DimensionError : Error {
    using Error::Error;
};

// Argument outside the mathematical domain of an operation (z <= 0, sigma <= 0, ...).
struct DomainError : Error {
    using Error::Error;
};

// Index outside a discrete range (depth level w, grid position).
struct IndexError : Error {
    using Error::Error;
};

// Malformed file contents. Message names the offending key or byte offset.
struct FormatError : Error {
    using Error::Error;
};

// Statistics requested over an empty or fully-invalid set of values.
struct EmptyStatsError : Error {
    using Error::Error;
};

}  // namespace pstereo
