#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pro_ood {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/layer shape mismatches.
struct DimensionError : Error {
    using Error::Error;
};

// Invalid parameter values (negative widths, K out of range, unknown names...).
struct ValueError : Error {
    using Error::Error;
};

// Malformed file content; `offset` is the byte position where parsing failed.
struct ParseError : Error {
    std::size_t offset;
    ParseError(const std::string& msg, std::size_t byte_offset)
        : Error(msg + " (byte " + std::to_string(byte_offset) + ")"), offset(byte_offset) {}
};

// File parsed but its contents are internally inconsistent.
struct SchemaError : Error {
    using Error::Error;
};

// Non-finite values where the contract demands finite ones (divergence etc.).
struct NumericError : Error {
    using Error::Error;
};

// Filesystem-level failures.
struct IoError : Error {
    using Error::Error;
};

}  // namespace pro_ood
